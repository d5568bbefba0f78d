//! Volume quality metrics.
//!
//! All range-normalised metrics take their dynamic range `R` from the
//! `truth` argument, so they are not symmetric in their arguments.
//!
//! * `nrmse = rmse / R`
//! * `psnr  = 20 log10(R / rmse)`, infinite when the inputs are identical
//! * `ssim3d` averages the SSIM index over every fully contained cubic
//!   window (uniform weights, population statistics) with
//!   `C1 = (k1 R)²`, `C2 = (k2 R)²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SSIM_WINDOW: usize = 7;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// PSNR in dB, or a flag for identical inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Psnr {
    pub db: Option<f64>,
    pub infinite: bool,
}

impl Psnr {
    /// Value for averaging and tables; identical inputs map to `+inf`.
    pub fn value(&self) -> f64 {
        self.db.unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mae: f64,
    pub nrmse: f64,
    pub ssim: f64,
    pub psnr: Option<f64>,
    pub psnr_infinite: bool,
    pub n_voxels: usize,
}

fn check_pair<T: Copy + Into<f64>>(pred: &[T], truth: &[T]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::Shape(format!(
            "prediction has {} elements, truth has {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Shape("empty tensors".into()));
    }
    for (i, (&p, &t)) in pred.iter().zip(truth).enumerate() {
        if !p.into().is_finite() || !t.into().is_finite() {
            return Err(Error::NonFinite { index: i });
        }
    }
    Ok(())
}

fn truth_range<T: Copy + Into<f64>>(truth: &[T]) -> Result<f64> {
    let (lo, hi) = truth
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| {
            (l.min(x.into()), h.max(x.into()))
        });
    let r = hi - lo;
    if r.is_nan() || r <= 0.0 {
        return Err(Error::Param(
            "truth is constant; range-normalised metric undefined".into(),
        ));
    }
    Ok(r)
}

fn rmse<T: Copy + Into<f64>>(pred: &[T], truth: &[T]) -> f64 {
    let sse: f64 = pred
        .iter()
        .zip(truth)
        .map(|(&p, &t)| {
            let d = p.into() - t.into();
            d * d
        })
        .sum();
    (sse / pred.len() as f64).sqrt()
}

pub fn mae<T: Copy + Into<f64>>(pred: &[T], truth: &[T]) -> Result<f64> {
    check_pair(pred, truth)?;
    let s: f64 = pred
        .iter()
        .zip(truth)
        .map(|(&p, &t)| (p.into() - t.into()).abs())
        .sum();
    Ok(s / pred.len() as f64)
}

pub fn nrmse<T: Copy + Into<f64>>(pred: &[T], truth: &[T]) -> Result<f64> {
    check_pair(pred, truth)?;
    let r = truth_range(truth)?;
    Ok(rmse(pred, truth) / r)
}

pub fn psnr<T: Copy + Into<f64>>(pred: &[T], truth: &[T]) -> Result<Psnr> {
    check_pair(pred, truth)?;
    let r = truth_range(truth)?;
    let e = rmse(pred, truth);
    Ok(if e == 0.0 {
        Psnr {
            db: None,
            infinite: true,
        }
    } else {
        Psnr {
            db: Some(20.0 * (r / e).log10()),
            infinite: false,
        }
    })
}

/// Sliding sums of width `w` along one axis of a `(z, y, x)` f64 buffer.
fn box_sum_axis(data: &[f64], dims: [usize; 3], axis: usize, w: usize) -> (Vec<f64>, [usize; 3]) {
    let mut out_dims = dims;
    out_dims[axis] = dims[axis] + 1 - w;
    let [ox, oy, oz] = out_dims;
    let [nx, ny, _] = dims;
    let stride = match axis {
        0 => 1,
        1 => nx,
        _ => nx * ny,
    };
    let mut out = vec![0.0; ox * oy * oz];
    for k in 0..oz {
        for j in 0..oy {
            for i in 0..ox {
                let base = (k * ny + j) * nx + i;
                let mut s = 0.0;
                for t in 0..w {
                    s += data[base + t * stride];
                }
                out[(k * oy + j) * ox + i] = s;
            }
        }
    }
    (out, out_dims)
}

fn box_sum(data: Vec<f64>, dims: [usize; 3], w: usize) -> Vec<f64> {
    let (a, d) = box_sum_axis(&data, dims, 0, w);
    let (b, d) = box_sum_axis(&a, d, 1, w);
    box_sum_axis(&b, d, 2, w).0
}

/// Mean 3D SSIM over all valid `window³` windows. `dims` are `(nx, ny, nz)`
/// for data stored with x fastest.
pub fn ssim3d<T: Copy + Into<f64>>(
    pred: &[T],
    truth: &[T],
    dims: [usize; 3],
    window: usize,
    k1: f64,
    k2: f64,
) -> Result<f64> {
    check_pair(pred, truth)?;
    if dims[0] * dims[1] * dims[2] != pred.len() {
        return Err(Error::Shape(format!(
            "dims {:?} do not match {} elements",
            dims,
            pred.len()
        )));
    }
    if window == 0 || dims.iter().any(|&n| n < window) {
        return Err(Error::Shape(format!(
            "every dimension of {dims:?} must be >= the SSIM window {window}"
        )));
    }
    let r = truth_range(truth)?;
    let c1 = (k1 * r).powi(2);
    let c2 = (k2 * r).powi(2);
    let x: Vec<f64> = pred.iter().map(|&v| v.into()).collect();
    let y: Vec<f64> = truth.iter().map(|&v| v.into()).collect();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a * b).collect();
    let n = (window * window * window) as f64;
    let sx = box_sum(x, dims, window);
    let sy = box_sum(y, dims, window);
    let sxx = box_sum(xx, dims, window);
    let syy = box_sum(yy, dims, window);
    let sxy = box_sum(xy, dims, window);
    let mut total = 0.0;
    for w in 0..sx.len() {
        let mx = sx[w] / n;
        let my = sy[w] / n;
        let vx = sxx[w] / n - mx * mx;
        let vy = syy[w] / n - my * my;
        let cxy = sxy[w] / n - mx * my;
        total +=
            ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    Ok(total / sx.len() as f64)
}

/// All four metrics with the default SSIM parameters.
pub fn evaluate<T: Copy + Into<f64>>(
    pred: &[T],
    truth: &[T],
    dims: [usize; 3],
) -> Result<MetricsReport> {
    let p = psnr(pred, truth)?;
    Ok(MetricsReport {
        mae: mae(pred, truth)?,
        nrmse: nrmse(pred, truth)?,
        ssim: ssim3d(pred, truth, dims, SSIM_WINDOW, SSIM_K1, SSIM_K2)?,
        psnr: p.db,
        psnr_infinite: p.infinite,
        n_voxels: pred.len(),
    })
}
