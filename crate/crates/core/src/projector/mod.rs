//! Forward projectors.
//!
//! [`forward_project`] produces realistic DRRs by fixed-step ray marching
//! through the trilinearly interpolated volume. [`splat_project`] deposits
//! each voxel onto the detector with the same bilinear footprint that the
//! back-projector gathers from, so its matrix is exactly the transpose of
//! [`crate::backprojector::backproject`]. [`siddon_line_integral`] is the
//! exact radiological path through box-shaped voxels.

pub mod siddon;

pub use siddon::{siddon_line_integral, siddon_trace};

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::{ConeBeamGeometry, DetectorSpec, ViewAngleSet, VolumeGrid};
use crate::volume::{Projection2D, ProjectionSet, Volume3D};

/// Up to four `(pixel index, weight)` pairs of a bilinear footprint.
pub(crate) struct Footprint {
    pub taps: [(usize, f64); 4],
    pub len: usize,
}

/// Bilinear taps of detector position `(u, v)` that fall on the detector.
#[inline]
pub(crate) fn bilinear_footprint(det: &DetectorSpec, u: f64, v: f64) -> Footprint {
    let (a, b) = det.uv_to_pixel(u, v);
    let mut fp = Footprint {
        taps: [(0, 0.0); 4],
        len: 0,
    };
    // keep the cast away from huge values
    if !(a > -1.0 && a < det.nu as f64 && b > -1.0 && b < det.nv as f64) {
        return fp;
    }
    let a0 = a.floor();
    let b0 = b.floor();
    let fa = a - a0;
    let fb = b - b0;
    let a0 = a0 as i64;
    let b0 = b0 as i64;
    let taps = [
        (a0, b0, (1.0 - fa) * (1.0 - fb)),
        (a0 + 1, b0, fa * (1.0 - fb)),
        (a0, b0 + 1, (1.0 - fa) * fb),
        (a0 + 1, b0 + 1, fa * fb),
    ];
    for (pa, pb, w) in taps {
        if w != 0.0 && pa >= 0 && pb >= 0 && (pa as usize) < det.nu && (pb as usize) < det.nv {
            fp.taps[fp.len] = (pb as usize * det.nu + pa as usize, w);
            fp.len += 1;
        }
    }
    fp
}

/// Trilinear sample at a physical point. Positions between the outermost
/// voxel centres and the grid boundary take the edge value.
#[inline]
pub(crate) fn sample_trilinear(grid: &VolumeGrid, data: &[f32], p: [f64; 3]) -> f64 {
    let mut idx = [0usize; 3];
    let mut frac = [0.0f64; 3];
    for axis in 0..3 {
        let n = grid.dims[axis];
        let c = p[axis] / grid.spacing[axis] + (n as f64 - 1.0) * 0.5;
        let c = c.clamp(0.0, (n - 1) as f64);
        let i = (c.floor() as usize).min(n.saturating_sub(2));
        idx[axis] = i;
        frac[axis] = if n > 1 { c - i as f64 } else { 0.0 };
    }
    let [nx, ny, _] = grid.dims;
    let step = [
        usize::from(nx > 1),
        if grid.dims[1] > 1 { nx } else { 0 },
        if grid.dims[2] > 1 { nx * ny } else { 0 },
    ];
    let base = grid.index(idx[0], idx[1], idx[2]);
    let v = |o: usize| data[base + o] as f64;
    let [fx, fy, fz] = frac;
    let c00 = v(0) * (1.0 - fx) + v(step[0]) * fx;
    let c10 = v(step[1]) * (1.0 - fx) + v(step[1] + step[0]) * fx;
    let c01 = v(step[2]) * (1.0 - fx) + v(step[2] + step[0]) * fx;
    let c11 = v(step[2] + step[1]) * (1.0 - fx) + v(step[2] + step[1] + step[0]) * fx;
    let c0 = c00 * (1.0 - fy) + c10 * fy;
    let c1 = c01 * (1.0 - fy) + c11 * fy;
    c0 * (1.0 - fz) + c1 * fz
}

/// Parametric interval `[t0, t1] ⊂ [0, 1]` of the segment `src + t·dir`
/// inside the axis-aligned box `[-half, half]`.
#[inline]
pub(crate) fn clip_to_box(src: [f64; 3], dir: [f64; 3], half: [f64; 3]) -> Option<(f64, f64)> {
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for axis in 0..3 {
        if dir[axis] == 0.0 {
            if src[axis] < -half[axis] || src[axis] > half[axis] {
                return None;
            }
            continue;
        }
        let inv = 1.0 / dir[axis];
        let mut lo = (-half[axis] - src[axis]) * inv;
        let mut hi = (half[axis] - src[axis]) * inv;
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        t0 = t0.max(lo);
        t1 = t1.min(hi);
    }
    (t1 > t0).then_some((t0, t1))
}

/// Ray-marching step for a grid: half the smallest voxel spacing.
pub fn march_step(grid: &VolumeGrid) -> f64 {
    grid.spacing.iter().copied().fold(f64::INFINITY, f64::min) * 0.5
}

/// Line integral along `src → dst` by midpoint ray marching.
pub(crate) fn march_ray(
    grid: &VolumeGrid,
    data: &[f32],
    src: [f64; 3],
    dst: [f64; 3],
    step: f64,
) -> f64 {
    let dir = [dst[0] - src[0], dst[1] - src[1], dst[2] - src[2]];
    let Some((t0, t1)) = clip_to_box(src, dir, grid.half_extent()) else {
        return 0.0;
    };
    let seg_len = (t1 - t0) * (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    let n = (seg_len / step).ceil().max(1.0) as usize;
    let dt = (t1 - t0) / n as f64;
    let h = seg_len / n as f64;
    let mut acc = 0.0;
    for k in 0..n {
        let t = t0 + (k as f64 + 0.5) * dt;
        let p = [
            src[0] + t * dir[0],
            src[1] + t * dir[1],
            src[2] + t * dir[2],
        ];
        acc += sample_trilinear(grid, data, p);
    }
    acc * h
}

/// DRR for one view angle.
pub fn forward_project_view(
    volume: &Volume3D,
    geom: &ConeBeamGeometry,
    theta: f64,
) -> Result<Projection2D> {
    volume.check_grid(geom)?;
    let mut proj = Projection2D::zeros(geom.detector, theta);
    fill_view(volume, geom, theta, &mut proj.data);
    Ok(proj)
}

fn fill_view(volume: &Volume3D, geom: &ConeBeamGeometry, theta: f64, out: &mut [f32]) {
    let det = geom.detector;
    let src = geom.source_position(theta);
    let step = march_step(&volume.grid);
    out.par_chunks_mut(det.nu).enumerate().for_each(|(b, row)| {
        for (a, px) in row.iter_mut().enumerate() {
            let (u, v) = det.pixel_to_uv(a as f64, b as f64);
            let dst = geom.detector_point(u, v, theta);
            *px = march_ray(&volume.grid, &volume.data, src, dst, step) as f32;
        }
    });
}

/// Line integrals of the volume from the source to every detector pixel
/// centre, for each angle. Output units are intensity·mm.
pub fn forward_project(
    volume: &Volume3D,
    geom: &ConeBeamGeometry,
    angles: &ViewAngleSet,
) -> Result<ProjectionSet> {
    volume.check_grid(geom)?;
    let det = geom.detector;
    let mut stack = vec![0.0f32; det.len() * angles.len()];
    stack
        .par_chunks_mut(det.len())
        .zip(angles.as_slice().par_iter())
        .for_each(|(out, &theta)| fill_view(volume, geom, theta, out));
    ProjectionSet::from_stack(det, angles, stack)
}

/// Voxel-driven projection: every voxel deposits its value onto the
/// detector pixels around its projected centre with bilinear weights.
pub fn splat_project(
    volume: &Volume3D,
    geom: &ConeBeamGeometry,
    angles: &ViewAngleSet,
) -> Result<ProjectionSet> {
    volume.check_grid(geom)?;
    let det = geom.detector;
    let grid = volume.grid;
    let [nx, ny, nz] = grid.dims;
    let views: Vec<Projection2D> = angles
        .as_slice()
        .par_iter()
        .map(|&theta| {
            let (sin, cos) = theta.sin_cos();
            let mut acc = vec![0.0f64; det.len()];
            for k in 0..nz {
                for j in 0..ny {
                    for i in 0..nx {
                        let value = volume.data[grid.index(i, j, k)] as f64;
                        if value == 0.0 {
                            continue;
                        }
                        let (u, v) = geom.project_point(grid.voxel_center(i, j, k), sin, cos);
                        let fp = bilinear_footprint(&det, u, v);
                        for &(pix, w) in &fp.taps[..fp.len] {
                            acc[pix] += w * value;
                        }
                    }
                }
            }
            Projection2D {
                theta,
                detector: det,
                data: acc.into_iter().map(|x| x as f32).collect(),
            }
        })
        .collect();
    ProjectionSet::new(views)
}
