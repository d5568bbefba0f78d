//! Simultaneous algebraic reconstruction.
//!
//! One sweep visits the views in ascending angle. For view `θ` with
//! ray-driven forward operator `A_θ` and voxel-driven back-projection `B_θ`:
//!
//! ```text
//! r  = p_θ - A_θ x
//! x += λ · B_θ(r / A_θ 1) / B_θ 1
//! ```
//!
//! Normaliser entries below 1e-8 are replaced by 1. After each sweep an
//! optional TV descent runs, followed by an optional clamp at zero.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tv::tv_denoise_step;
use crate::backprojector::backproject_view;
use crate::error::{Error, Result};
use crate::geometry::ConeBeamGeometry;
use crate::projector::forward_project_view;
use crate::volume::{norm2, Projection2D, ProjectionSet, Volume3D};

const NORM_FLOOR: f32 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SartParams {
    pub iterations: usize,
    pub relaxation: f64,
    pub tv_weight: f64,
    pub tv_steps: usize,
    pub nonnegative: bool,
}

impl Default for SartParams {
    fn default() -> Self {
        SartParams {
            iterations: 20,
            relaxation: 1.0,
            tv_weight: 0.0,
            tv_steps: 0,
            nonnegative: false,
        }
    }
}

impl SartParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return Err(Error::Param(format!(
                "SART relaxation must be in (0, 2), got {}",
                self.relaxation
            )));
        }
        if !(self.tv_weight >= 0.0 && self.tv_weight.is_finite()) {
            return Err(Error::Param(format!(
                "TV weight must be >= 0, got {}",
                self.tv_weight
            )));
        }
        Ok(())
    }
}

fn guard(values: &mut [f32]) {
    for v in values {
        if v.abs() < NORM_FLOOR {
            *v = 1.0;
        }
    }
}

/// Per-view normalisers `A_θ 1` (ray lengths) and `B_θ 1` (footprint mass).
struct Normalizers {
    rows: Vec<Vec<f32>>,
    cols: Vec<Vec<f32>>,
}

impl Normalizers {
    fn new(projections: &ProjectionSet, geom: &ConeBeamGeometry) -> Result<Self> {
        let ones = Volume3D::filled(geom.volume, 1.0);
        let mut rows = Vec::with_capacity(projections.len());
        let mut cols = Vec::with_capacity(projections.len());
        for view in projections.views() {
            let mut r = forward_project_view(&ones, geom, view.theta)?.data;
            guard(&mut r);
            rows.push(r);
            let unit = Projection2D {
                theta: view.theta,
                detector: geom.detector,
                data: vec![1.0; geom.detector.len()],
            };
            let mut c = backproject_view(&unit, geom)?.data;
            guard(&mut c);
            cols.push(c);
        }
        Ok(Normalizers { rows, cols })
    }
}

fn check_inputs(
    projections: &ProjectionSet,
    geom: &ConeBeamGeometry,
    params: &SartParams,
) -> Result<()> {
    params.validate()?;
    projections.check_detector(geom)?;
    Ok(())
}

/// SART from a zero volume.
pub fn sart_reconstruct(
    projections: &ProjectionSet,
    geom: &ConeBeamGeometry,
    params: &SartParams,
) -> Result<Volume3D> {
    sart_reconstruct_from(
        Volume3D::zeros(geom.volume),
        projections,
        geom,
        params,
        |_, _| {},
    )
}

/// SART from `initial`, calling `observe(sweep, &x)` after every sweep.
pub fn sart_reconstruct_from(
    initial: Volume3D,
    projections: &ProjectionSet,
    geom: &ConeBeamGeometry,
    params: &SartParams,
    mut observe: impl FnMut(usize, &Volume3D),
) -> Result<Volume3D> {
    check_inputs(projections, geom, params)?;
    initial.check_grid(geom)?;
    let norms = Normalizers::new(projections, geom)?;
    let lambda = params.relaxation as f32;
    let mut x = initial;
    for sweep in 0..params.iterations {
        for (v, view) in projections.views().iter().enumerate() {
            let est = forward_project_view(&x, geom, view.theta)?;
            let ratio: Vec<f32> = view
                .data
                .iter()
                .zip(&est.data)
                .zip(&norms.rows[v])
                .map(|((&b, &a), &n)| (b - a) / n)
                .collect();
            let correction = backproject_view(
                &Projection2D {
                    theta: view.theta,
                    detector: view.detector,
                    data: ratio,
                },
                geom,
            )?;
            x.data
                .par_iter_mut()
                .zip(correction.data.par_iter().zip(norms.cols[v].par_iter()))
                .for_each(|(xv, (&c, &n))| *xv += lambda * c / n);
        }
        if params.tv_weight > 0.0 {
            x = tv_denoise_step(&x, params.tv_weight, params.tv_steps.max(1))?;
        }
        if params.nonnegative {
            x.data.iter_mut().for_each(|v| *v = v.max(0.0));
        }
        observe(sweep, &x);
    }
    Ok(x)
}

/// Geometry-normalised GPI `B(p / A1) / B1`: the back-projection of
/// ray-length-normalised views divided by the per-voxel footprint mass.
pub fn normalized_gpi(projections: &ProjectionSet, geom: &ConeBeamGeometry) -> Result<Volume3D> {
    projections.check_detector(geom)?;
    let norms = Normalizers::new(projections, geom)?;
    let mut num = vec![0.0f64; geom.volume.len()];
    let mut den = vec![0.0f64; geom.volume.len()];
    for (v, view) in projections.views().iter().enumerate() {
        let scaled = Projection2D {
            theta: view.theta,
            detector: view.detector,
            data: view
                .data
                .iter()
                .zip(&norms.rows[v])
                .map(|(&b, &n)| b / n)
                .collect(),
        };
        let bp = backproject_view(&scaled, geom)?;
        let unit = Projection2D {
            theta: view.theta,
            detector: view.detector,
            data: vec![1.0; geom.detector.len()],
        };
        let mass = backproject_view(&unit, geom)?;
        for ((n, d), (&b, &m)) in num
            .iter_mut()
            .zip(den.iter_mut())
            .zip(bp.data.iter().zip(&mass.data))
        {
            *n += b as f64;
            *d += m as f64;
        }
    }
    let data = num
        .iter()
        .zip(&den)
        .map(|(&n, &d)| {
            if d.abs() < NORM_FLOOR as f64 {
                0.0
            } else {
                (n / d) as f32
            }
        })
        .collect();
    Volume3D::from_data(geom.volume, data)
}

/// Relative data residual `‖A x − b‖ / ‖b‖` with the ray-driven projector.
pub fn data_residual(
    x: &Volume3D,
    projections: &ProjectionSet,
    geom: &ConeBeamGeometry,
) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for view in projections.views() {
        let est = forward_project_view(x, geom, view.theta)?;
        num += est
            .data
            .iter()
            .zip(&view.data)
            .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
            .sum::<f64>();
        den += norm2(&view.data).powi(2);
    }
    Ok(if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DetectorSpec, ViewAngleSet, VolumeGrid};

    #[test]
    fn zero_data_fixed_point() {
        let g = ConeBeamGeometry::new(
            1000.0,
            1500.0,
            DetectorSpec::square(12, 4.0),
            VolumeGrid::cubic(6, 4.0),
        )
        .unwrap();
        let angles =
            crate::geometry::make_view_angles(4, crate::geometry::ViewMode::Input).unwrap();
        let p = ProjectionSet::uniform(g.detector, &angles, 0.0);
        let x = sart_reconstruct(&p, &g, &SartParams::default()).unwrap();
        assert!(x.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_voxel_least_squares() {
        let g = ConeBeamGeometry::new(
            1000.0,
            1500.0,
            DetectorSpec::square(1, 3.0),
            VolumeGrid::cubic(1, 2.0),
        )
        .unwrap();
        let angles = ViewAngleSet::new(vec![0.0]).unwrap();
        let b = 5.0f32;
        let p = ProjectionSet::uniform(g.detector, &angles, b);
        let params = SartParams {
            iterations: 1,
            ..Default::default()
        };
        let x = sart_reconstruct(&p, &g, &params).unwrap();
        // system matrix entry: chord length of the central ray through the voxel
        let a = forward_project_view(&Volume3D::filled(g.volume, 1.0), &g, 0.0)
            .unwrap()
            .data[0] as f64;
        assert!((a - 2.0).abs() < 1e-9);
        let ls = b as f64 * a / (a * a);
        assert!(
            (x.data[0] as f64 - ls).abs() < 1e-6,
            "{} vs {ls}",
            x.data[0]
        );
    }

    #[test]
    fn invalid_relaxation() {
        let p = SartParams {
            relaxation: 2.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}
