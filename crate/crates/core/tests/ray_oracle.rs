mod common;

use common::*;
use conebeam::projector::siddon::siddon_trace;
use conebeam::{forward_project, siddon_line_integral, ViewAngleSet, Volume3D, VolumeGrid};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn drr_agrees_with_siddon_on_smooth_phantoms() {
    let g = small_geometry(32, 4.0, 32, 6.0);
    for seed in 0..8 {
        let mut r = rng(seed);
        let vol = smooth_phantom(g.volume, &mut r);
        let w = drr_vs_siddon(&vol, &g, r.gen_range(0.0..std::f64::consts::TAU));
        assert!(w < 0.02, "seed {seed}: worst relative error {w}");
    }
}

#[test]
fn homogeneous_cube_central_ray() {
    // cube of side 40 mm inside a 60 mm grid
    let g = small_geometry(30, 2.0, 15, 3.0);
    let mut vol = Volume3D::zeros(g.volume);
    let [nx, ny, nz] = g.volume.dims;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let c = g.volume.voxel_center(i, j, k);
                if c.iter().all(|x| x.abs() < 20.0) {
                    vol.data[g.volume.index(i, j, k)] = 0.5;
                }
            }
        }
    }
    let p = forward_project(&vol, &g, &ViewAngleSet::new(vec![0.0]).unwrap()).unwrap();
    let centre = p.views()[0].get(7, 7) as f64;
    assert!((centre - 0.5 * 40.0).abs() <= 0.01 * 20.0, "got {centre}");
}

fn brute_integral(vol: &Volume3D, src: [f64; 3], dst: [f64; 3], n: usize) -> f64 {
    let grid = vol.grid;
    let half = grid.half_extent();
    let len =
        ((dst[0] - src[0]).powi(2) + (dst[1] - src[1]).powi(2) + (dst[2] - src[2]).powi(2)).sqrt();
    let mut s = 0.0;
    for t in 0..n {
        let f = (t as f64 + 0.5) / n as f64;
        let p = [0, 1, 2].map(|a| src[a] + f * (dst[a] - src[a]));
        let idx: Vec<Option<usize>> = (0..3)
            .map(|a| {
                let x = (p[a] + half[a]) / grid.spacing[a];
                (x >= 0.0 && x < grid.dims[a] as f64).then(|| x.floor() as usize)
            })
            .collect();
        if let [Some(i), Some(j), Some(k)] = idx[..] {
            s += vol.get(i, j, k) as f64;
        }
    }
    s * len / n as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn siddon_matches_dense_sampling(seed in any::<u64>(), a in prop::array::uniform3(-30.0..30.0f64), b in prop::array::uniform3(-30.0..30.0f64)) {
        let grid = VolumeGrid::cubic(6, 8.0);
        let mut r = rng(seed);
        let vol = Volume3D::from_data(grid, (0..grid.len()).map(|_| r.gen_range(0.0f32..1.0)).collect()).unwrap();
        let exact = siddon_line_integral(&vol, a, b).unwrap();
        let brute = brute_integral(&vol, a, b, 200_000);
        prop_assert!((exact - brute).abs() <= 1e-3 * (1.0 + brute.abs()), "{exact} vs {brute}");
    }

    #[test]
    fn siddon_lengths_sum_to_chord(a in prop::array::uniform3(-80.0..80.0f64), b in prop::array::uniform3(-80.0..80.0f64)) {
        let grid = VolumeGrid::cubic(5, 10.0);
        let ones = Volume3D::filled(grid, 1.0);
        let mut total = 0.0;
        siddon_trace(&grid, a, b, |_, l| total += l).unwrap();
        prop_assert!((total - siddon_line_integral(&ones, a, b).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn face_plane_ray_against_dense_sampling() {
    let grid = VolumeGrid::cubic(4, 10.0);
    let mut r = rng(4);
    let vol = Volume3D::from_data(
        grid,
        (0..grid.len()).map(|_| r.gen_range(0.0f32..1.0)).collect(),
    )
    .unwrap();
    // y = 0 and z = 10 are voxel faces
    let src = [-50.0, 0.0, 10.0];
    let dst = [50.0, 0.0, 10.0];
    let exact = siddon_line_integral(&vol, src, dst).unwrap();
    let brute = brute_integral(&vol, src, dst, 100_000);
    assert!((exact - brute).abs() <= 1e-3 * brute, "{exact} vs {brute}");
}
