#![allow(dead_code)]

use conebeam::{
    backproject, splat_project, ConeBeamGeometry, DetectorSpec, ProjectionSet, ViewAngleSet,
    Volume3D, VolumeGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small geometry with the default source distances.
pub fn small_geometry(n_vox: usize, spacing: f64, n_pix: usize, pitch: f64) -> ConeBeamGeometry {
    ConeBeamGeometry::default()
        .with_grids(
            DetectorSpec::square(n_pix, pitch),
            VolumeGrid::cubic(n_vox, spacing),
        )
        .unwrap()
}

pub fn random_volume(grid: VolumeGrid, r: &mut ChaCha8Rng) -> Volume3D {
    let data = (0..grid.len()).map(|_| r.gen_range(-1.0f32..1.0)).collect();
    Volume3D::from_data(grid, data).unwrap()
}

pub fn random_projections(
    det: DetectorSpec,
    angles: &ViewAngleSet,
    r: &mut ChaCha8Rng,
) -> ProjectionSet {
    let data = (0..det.len() * angles.len())
        .map(|_| r.gen_range(-1.0f32..1.0))
        .collect();
    ProjectionSet::from_stack(det, angles, data).unwrap()
}

/// Band-limited random field: unit background plus Fourier modes of at most
/// one cycle per axis across the grid, values within [0.5, 1.5].
pub fn smooth_phantom(grid: VolumeGrid, r: &mut ChaCha8Rng) -> Volume3D {
    let half = grid.half_extent();
    let n_modes = r.gen_range(3..7);
    let modes: Vec<([f64; 3], f64, f64)> = (0..n_modes)
        .map(|_| {
            let k =
                [0, 1, 2].map(|a| r.gen_range(-1i32..=1) as f64 * std::f64::consts::PI / half[a]);
            (
                k,
                r.gen_range(0.0..std::f64::consts::TAU),
                0.5 / n_modes as f64,
            )
        })
        .collect();
    let [nx, ny, nz] = grid.dims;
    let mut data = Vec::with_capacity(grid.len());
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let p = grid.voxel_center(i, j, k);
                let v: f64 = 1.0
                    + modes
                        .iter()
                        .map(|(w, phase, a)| {
                            a * (w[0] * p[0] + w[1] * p[1] + w[2] * p[2] + phase).cos()
                        })
                        .sum::<f64>();
                data.push(v as f32);
            }
        }
    }
    Volume3D::from_data(grid, data).unwrap()
}

/// Row-major dense matrix of `splat_project`: rows index detector samples,
/// columns index voxels.
pub fn splat_matrix(geom: &ConeBeamGeometry, angles: &ViewAngleSet) -> Vec<Vec<f64>> {
    let n_vox = geom.volume.len();
    let n_det = geom.detector.len() * angles.len();
    let mut m = vec![vec![0.0; n_vox]; n_det];
    for col in 0..n_vox {
        let mut e = Volume3D::zeros(geom.volume);
        e.data[col] = 1.0;
        let p = splat_project(&e, geom, angles).unwrap().stack();
        for (row, v) in m.iter_mut().zip(&p) {
            row[col] = *v as f64;
        }
    }
    m
}

/// Row-major dense matrix of `backproject`: rows index voxels, columns
/// index detector samples.
pub fn backproject_matrix(geom: &ConeBeamGeometry, angles: &ViewAngleSet) -> Vec<Vec<f64>> {
    let n_vox = geom.volume.len();
    let n_det = geom.detector.len() * angles.len();
    let mut m = vec![vec![0.0; n_det]; n_vox];
    for col in 0..n_det {
        let mut data = vec![0.0f32; n_det];
        data[col] = 1.0;
        let p = ProjectionSet::from_stack(geom.detector, angles, data).unwrap();
        let g = backproject(&p, geom).unwrap();
        for (row, v) in m.iter_mut().zip(&g.data) {
            row[col] = *v as f64;
        }
    }
    m
}

pub fn bf_mae(p: &[f32], t: &[f32]) -> f64 {
    let mut s = 0.0;
    for i in 0..p.len() {
        s += (p[i] as f64 - t[i] as f64).abs();
    }
    s / p.len() as f64
}

fn bf_range(t: &[f32]) -> f64 {
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for &v in t {
        lo = lo.min(v as f64);
        hi = hi.max(v as f64);
    }
    hi - lo
}

fn bf_rmse(p: &[f32], t: &[f32]) -> f64 {
    let mut s = 0.0;
    for i in 0..p.len() {
        let d = p[i] as f64 - t[i] as f64;
        s += d * d;
    }
    (s / p.len() as f64).sqrt()
}

pub fn bf_nrmse(p: &[f32], t: &[f32]) -> f64 {
    bf_rmse(p, t) / bf_range(t)
}

pub fn bf_psnr(p: &[f32], t: &[f32]) -> f64 {
    20.0 * (bf_range(t) / bf_rmse(p, t)).log10()
}

/// Two-pass SSIM over every fully contained `w³` window.
pub fn bf_ssim(p: &[f32], t: &[f32], dims: [usize; 3], w: usize) -> f64 {
    let [nx, ny, nz] = dims;
    let r = bf_range(t);
    let c1 = (0.01 * r) * (0.01 * r);
    let c2 = (0.03 * r) * (0.03 * r);
    let n = (w * w * w) as f64;
    let mut total = 0.0;
    let mut count = 0usize;
    for k0 in 0..=nz - w {
        for j0 in 0..=ny - w {
            for i0 in 0..=nx - w {
                let mut idx = Vec::with_capacity(w * w * w);
                for k in k0..k0 + w {
                    for j in j0..j0 + w {
                        for i in i0..i0 + w {
                            idx.push((k * ny + j) * nx + i);
                        }
                    }
                }
                let mx = idx.iter().map(|&q| p[q] as f64).sum::<f64>() / n;
                let my = idx.iter().map(|&q| t[q] as f64).sum::<f64>() / n;
                let mut vx = 0.0;
                let mut vy = 0.0;
                let mut cxy = 0.0;
                for &q in &idx {
                    let a = p[q] as f64 - mx;
                    let b = t[q] as f64 - my;
                    vx += a * a;
                    vy += b * b;
                    cxy += a * b;
                }
                vx /= n;
                vy /= n;
                cxy /= n;
                total += (2.0 * mx * my + c1) * (2.0 * cxy + c2)
                    / ((mx * mx + my * my + c1) * (vx + vy + c2));
                count += 1;
            }
        }
    }
    total / count as f64
}

/// Sum of Gaussian blobs around the centre; tails reach the grid edges.
pub fn blob_phantom(grid: VolumeGrid, r: &mut ChaCha8Rng) -> Volume3D {
    let half = grid.half_extent();
    let blobs: Vec<([f64; 3], f64, f64)> = (0..r.gen_range(2..6))
        .map(|_| {
            let c = [0, 1, 2].map(|a| r.gen_range(-0.3..0.3) * half[a]);
            (c, r.gen_range(0.25..0.4) * half[0], r.gen_range(0.3..1.0))
        })
        .collect();
    let [nx, ny, nz] = grid.dims;
    let mut data = Vec::with_capacity(grid.len());
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let p = grid.voxel_center(i, j, k);
                let v: f64 = blobs
                    .iter()
                    .map(|(c, s, a)| {
                        let d2 =
                            (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2);
                        a * (-d2 / (2.0 * s * s)).exp()
                    })
                    .sum();
                data.push(v as f32);
            }
        }
    }
    Volume3D::from_data(grid, data).unwrap()
}

/// Worst per-pixel relative DRR error against Siddon over pixels whose
/// Siddon value exceeds 1% of the view maximum.
pub fn drr_vs_siddon(vol: &Volume3D, geom: &ConeBeamGeometry, theta: f64) -> f64 {
    let angles = ViewAngleSet::new(vec![theta]).unwrap();
    let view = &conebeam::forward_project(vol, geom, &angles)
        .unwrap()
        .views()[0]
        .data
        .clone();
    let src = geom.source_position(theta);
    let mut exact = vec![0.0; geom.detector.len()];
    for b in 0..geom.detector.nv {
        for a in 0..geom.detector.nu {
            let (u, v) = geom.pixel_to_uv(a as f64, b as f64);
            exact[b * geom.detector.nu + a] =
                conebeam::siddon_line_integral(vol, src, geom.detector_point(u, v, theta)).unwrap();
        }
    }
    let peak = exact.iter().cloned().fold(0.0, f64::max);
    exact
        .iter()
        .zip(view)
        .filter(|(&e, _)| e > 0.01 * peak)
        .map(|(&e, &d)| (d as f64 - e).abs() / e)
        .fold(0.0, f64::max)
}
