//! Procedural ellipsoid phantoms.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::VolumeGrid;
use crate::rng::CounterRng;
use crate::volume::Volume3D;

/// Ellipsoid with an in-plane rotation about z, adding `intensity` to every
/// voxel centre it contains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidSpec {
    pub center: [f64; 3],
    pub semi_axes: [f64; 3],
    #[serde(default)]
    pub rotation: f64,
    pub intensity: f64,
}

impl EllipsoidSpec {
    pub fn validate(&self) -> Result<()> {
        if self.semi_axes.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::Param(format!(
                "ellipsoid semi-axes must be positive, got {:?}",
                self.semi_axes
            )));
        }
        Ok(())
    }

    /// Closed interior test (boundary counts as inside).
    #[inline]
    pub fn contains(&self, p: [f64; 3]) -> bool {
        let (s, c) = self.rotation.sin_cos();
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let dz = p[2] - self.center[2];
        let x = c * dx + s * dy;
        let y = -s * dx + c * dy;
        let [a, b, cz] = self.semi_axes;
        (x / a) * (x / a) + (y / b) * (y / b) + (dz / cz) * (dz / cz) <= 1.0
    }
}

/// Sum of the intensities of all ellipsoids containing each voxel centre.
pub fn ellipsoid_phantom(specs: &[EllipsoidSpec], grid: VolumeGrid) -> Result<Volume3D> {
    grid.validate()?;
    for s in specs {
        s.validate()?;
    }
    let [nx, ny, _] = grid.dims;
    let mut vol = Volume3D::zeros(grid);
    vol.data
        .par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(k, slab)| {
            for j in 0..ny {
                for i in 0..nx {
                    let p = grid.voxel_center(i, j, k);
                    let mut acc = 0.0f64;
                    for s in specs {
                        if s.contains(p) {
                            acc += s.intensity;
                        }
                    }
                    slab[j * nx + i] = acc as f32;
                }
            }
        });
    Ok(vol)
}

pub const BODY_INTENSITY: f64 = 1.0;
pub const LUNG_INTENSITY: f64 = -0.7;

/// Ellipsoid list of a chest-like phantom: body, two lungs and 3–8 internal
/// structures. Every parameter comes from a [`CounterRng`] keyed by `seed`.
pub fn random_anatomy_specs(seed: u64, grid: &VolumeGrid) -> Vec<EllipsoidSpec> {
    let mut rng = CounterRng::new(seed);
    let half = grid.half_extent();
    let body = [
        half[0] * rng.uniform(0.78, 0.90),
        half[1] * rng.uniform(0.58, 0.70),
        half[2] * rng.uniform(0.80, 0.92),
    ];
    let body_center = [
        half[0] * rng.uniform(-0.03, 0.03),
        half[1] * rng.uniform(-0.03, 0.03),
        0.0,
    ];
    let mut specs = vec![EllipsoidSpec {
        center: body_center,
        semi_axes: body,
        rotation: rng.uniform(-0.05, 0.05),
        intensity: BODY_INTENSITY,
    }];

    let lung_axes = [
        body[0] * rng.uniform(0.28, 0.34),
        body[1] * rng.uniform(0.50, 0.62),
        body[2] * rng.uniform(0.55, 0.70),
    ];
    let lung_x = body[0] * rng.uniform(0.42, 0.50);
    let lung_y = body[1] * rng.uniform(-0.10, 0.05);
    let lung_z = body[2] * rng.uniform(0.0, 0.15);
    for side in [-1.0, 1.0] {
        specs.push(EllipsoidSpec {
            center: [
                body_center[0] + side * lung_x,
                body_center[1] + lung_y,
                lung_z,
            ],
            semi_axes: lung_axes,
            rotation: side * rng.uniform(0.0, 0.15),
            intensity: LUNG_INTENSITY,
        });
    }

    let count = rng.range_inclusive(3, 8);
    for _ in 0..count {
        let axes = [
            body[0] * rng.uniform(0.05, 0.25),
            body[1] * rng.uniform(0.05, 0.25),
            body[2] * rng.uniform(0.05, 0.25),
        ];
        let center = [
            body_center[0] + body[0] * rng.uniform(-0.6, 0.6),
            body_center[1] + body[1] * rng.uniform(-0.6, 0.6),
            body[2] * rng.uniform(-0.6, 0.6),
        ];
        specs.push(EllipsoidSpec {
            center,
            semi_axes: axes,
            rotation: rng.uniform(0.0, PI),
            intensity: rng.uniform(0.2, 0.8),
        });
    }
    specs
}

pub fn random_anatomy_phantom(seed: u64, grid: VolumeGrid) -> Result<Volume3D> {
    ellipsoid_phantom(&random_anatomy_specs(seed, &grid), grid)
}
