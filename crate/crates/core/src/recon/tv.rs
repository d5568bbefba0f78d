use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::volume::Volume3D;

/// Smoothing of the TV gradient near flat regions.
pub const TV_EPSILON: f64 = 1e-6;

/// Forward differences with a zero difference across the far boundary.
#[inline]
fn grads(data: &[f32], dims: [usize; 3], i: usize, j: usize, k: usize) -> [f64; 3] {
    let [nx, ny, nz] = dims;
    let idx = (k * ny + j) * nx + i;
    let x = data[idx] as f64;
    [
        if i + 1 < nx {
            data[idx + 1] as f64 - x
        } else {
            0.0
        },
        if j + 1 < ny {
            data[idx + nx] as f64 - x
        } else {
            0.0
        },
        if k + 1 < nz {
            data[idx + nx * ny] as f64 - x
        } else {
            0.0
        },
    ]
}

/// Isotropic total variation `Σ |∇x|` with forward differences.
pub fn isotropic_tv(volume: &Volume3D) -> f64 {
    let dims = volume.grid.dims;
    let [nx, ny, nz] = dims;
    (0..nz)
        .into_par_iter()
        .map(|k| {
            let mut s = 0.0;
            for j in 0..ny {
                for i in 0..nx {
                    let g = grads(&volume.data, dims, i, j, k);
                    s += (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
                }
            }
            s
        })
        .collect::<Vec<_>>()
        .iter()
        .sum()
}

/// Gradient of `Σ sqrt(|∇x|² + ε)` with respect to every voxel.
pub fn tv_gradient(volume: &Volume3D, eps: f64) -> Vec<f64> {
    let dims = volume.grid.dims;
    let [nx, ny, nz] = dims;
    let data = &volume.data;
    let unit = |i: usize, j: usize, k: usize| {
        let g = grads(data, dims, i, j, k);
        let n = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + eps).sqrt();
        [g[0] / n, g[1] / n, g[2] / n]
    };
    let mut out = vec![0.0f64; data.len()];
    out.par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(k, slab)| {
            for j in 0..ny {
                for i in 0..nx {
                    let own = unit(i, j, k);
                    // own forward differences pull against the voxel
                    let mut g = -(if i + 1 < nx { own[0] } else { 0.0 })
                        - (if j + 1 < ny { own[1] } else { 0.0 })
                        - (if k + 1 < nz { own[2] } else { 0.0 });
                    if i > 0 {
                        g += unit(i - 1, j, k)[0];
                    }
                    if j > 0 {
                        g += unit(i, j - 1, k)[1];
                    }
                    if k > 0 {
                        g += unit(i, j, k - 1)[2];
                    }
                    slab[j * nx + i] = g;
                }
            }
        });
    out
}

/// `steps` descent steps on smoothed isotropic TV with nominal step size
/// `weight / steps`. Each step backtracks (halving) until the exact TV does
/// not increase; a step that cannot decrease TV leaves the volume unchanged.
pub fn tv_denoise_step(volume: &Volume3D, weight: f64, steps: usize) -> Result<Volume3D> {
    if !(weight >= 0.0 && weight.is_finite()) {
        return Err(Error::Param(format!(
            "TV weight must be >= 0, got {weight}"
        )));
    }
    if weight == 0.0 || steps == 0 {
        return Ok(volume.clone());
    }
    let tau0 = weight / steps as f64;
    let mut x = volume.clone();
    let mut tv = isotropic_tv(&x);
    for _ in 0..steps {
        let grad = tv_gradient(&x, TV_EPSILON);
        let mut tau = tau0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = Volume3D {
                grid: x.grid,
                data: x
                    .data
                    .iter()
                    .zip(&grad)
                    .map(|(&v, &g)| (v as f64 - tau * g) as f32)
                    .collect(),
            };
            let cand_tv = isotropic_tv(&cand);
            if cand_tv <= tv {
                x = cand;
                tv = cand_tv;
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(x)
}
