//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::*;
use conebeam::metrics::{mae, nrmse, psnr, ssim3d};
use conebeam::phantom::random_anatomy_phantom;
use conebeam::recon::{view_sweep, ReconMethod, SartParams, SweepConfig, DEFAULT_SWEEP_COUNTS};
use conebeam::volume::{dot, norm2};
use conebeam::{backproject, make_view_angles, splat_project, ConeBeamGeometry, ViewMode};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn adjoint_identity() -> Outcome {
    let g = small_geometry(16, 8.0, 16, 14.0);
    let angles = make_view_angles(4, ViewMode::Generated).unwrap();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let mut r = rng(seed);
        let v = random_volume(g.volume, &mut r);
        let p = random_projections(g.detector, &angles, &mut r);
        let lhs = dot(&splat_project(&v, &g, &angles).unwrap().stack(), &p.stack());
        let rhs = dot(&v.data, &backproject(&p, &g).unwrap().data);
        worst = worst.max((lhs - rhs).abs() / (norm2(&v.data) * norm2(&p.stack())));
    }
    let secs = start.elapsed().as_secs_f64();
    let msg = format!("worst |<Sv,p>-<v,Bp>|/(|v||p|) = {worst:.2e} over 100 pairs in {secs:.2} s");
    if worst <= 1e-5 && secs < 10.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn dense_matrix() -> Outcome {
    let g = small_geometry(8, 12.0, 8, 18.0);
    let angles = make_view_angles(4, ViewMode::Input).unwrap();
    let s = splat_matrix(&g, &angles);
    let b = backproject_matrix(&g, &angles);
    let mut worst = 0.0f64;
    let mut nonzero = 0usize;
    for (row, sr) in s.iter().enumerate() {
        for (col, v) in sr.iter().enumerate() {
            worst = worst.max((v - b[col][row]).abs());
            nonzero += (*v != 0.0) as usize;
        }
    }
    let msg = format!(
        "{}x{} matrices, {nonzero} nonzeros, max |S - B^T| = {worst:.2e}",
        s.len(),
        s[0].len()
    );
    if worst < 1e-6 && nonzero > 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn geometry_exactness() -> Outcome {
    let g = ConeBeamGeometry::default();
    let cases = [
        ([100.0, 0.0, 0.0], 0.0, (150.0, 0.0)),
        ([0.0, 0.0, 50.0], PI / 2.0, (0.0, 75.0)),
        ([100.0, 500.0, 0.0], 0.0, (300.0, 0.0)),
    ];
    let mut hand = 0.0f64;
    for (p, theta, (eu, ev)) in cases {
        let (u, v) = g.detector_coords(p, theta).unwrap();
        hand = hand.max((u - eu).abs()).max((v - ev).abs());
    }
    let mut r = rng(2024);
    let mut worst = 0.0f64;
    let rel = |a: (f64, f64), b: (f64, f64)| {
        let scale = 1.0 + a.0.abs().max(a.1.abs());
        ((a.0 - b.0).abs().max((a.1 - b.1).abs())) / scale
    };
    for _ in 0..10_000 {
        let p = [0, 1, 2].map(|_| r.gen_range(-180.0..180.0));
        let theta = r.gen_range(0.0..TAU);
        let phi = r.gen_range(0.0..TAU);
        let k = r.gen_range(-3..=3) as f64;
        let iso = g.detector_coords([0.0; 3], theta).unwrap();
        worst = worst.max(iso.0.abs()).max(iso.1.abs());
        let base = g.detector_coords(p, theta).unwrap();
        worst = worst.max(rel(base, g.detector_coords(p, theta + k * TAU).unwrap()));
        let (s, c) = phi.sin_cos();
        let q = [p[0] * c - p[1] * s, p[0] * s + p[1] * c, p[2]];
        worst = worst.max(rel(base, g.detector_coords(q, theta + phi).unwrap()));
    }
    let msg = format!(
        "hand-derived error {hand:.1e} mm; worst invariant deviation {worst:.1e} over 10^4 cases"
    );
    if hand <= 1e-9 && worst <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ray_oracle() -> Outcome {
    let g = small_geometry(32, 4.0, 32, 6.0);
    let mut worst = 0.0f64;
    for seed in 0..50 {
        let mut r = rng(1000 + seed);
        let vol = smooth_phantom(g.volume, &mut r);
        worst = worst.max(drr_vs_siddon(&vol, &g, r.gen_range(0.0..TAU)));
    }
    let msg = format!(
        "worst relative DRR error vs Siddon {:.2}% over 50 band-limited 32^3 phantoms",
        100.0 * worst
    );
    if worst < 0.02 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Informational only: Gaussian-blob phantoms whose tails reach the grid
/// edge, where the trilinear and box models separate.
fn ray_oracle_blob_info() -> String {
    let g = small_geometry(32, 4.0, 32, 6.0);
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let mut r = rng(5000 + seed);
        let vol = blob_phantom(g.volume, &mut r);
        worst = worst.max(drr_vs_siddon(&vol, &g, r.gen_range(0.0..TAU)));
    }
    format!(
        "Gaussian-blob phantoms: worst relative DRR error vs Siddon {:.2}% (not gated)",
        100.0 * worst
    )
}

fn view_trend() -> Outcome {
    let g = small_geometry(16, 8.0, 24, 8.0);
    let truths: Vec<_> = (0..10)
        .map(|s| random_anatomy_phantom(7000 + s, g.volume).unwrap())
        .collect();
    let ids: Vec<String> = (0..10).map(|s| format!("seed_{}", 7000 + s)).collect();
    let config = SweepConfig {
        method: ReconMethod::GpiSart,
        sart: SartParams::default(),
    };
    let start = Instant::now();
    let report = view_sweep(&truths, &ids, &g, &DEFAULT_SWEEP_COUNTS, &config).unwrap();
    let ssim: Vec<f64> = report.rows.iter().map(|r| r.ssim).collect();
    let monotone = ssim.windows(2).all(|w| w[1] >= w[0] - 0.01);
    let at = |n: usize| ssim[DEFAULT_SWEEP_COUNTS.iter().position(|&c| c == n).unwrap()];
    let early = at(30) - at(1);
    let late = at(120) - at(30);
    let curve: Vec<String> = DEFAULT_SWEEP_COUNTS
        .iter()
        .zip(&ssim)
        .map(|(n, s)| format!("{n}:{s:.4}"))
        .collect();
    let msg = format!(
        "SSIM {} ; gain 1->30 {early:.4}, 30->120 {late:.4} ({:.1} s)",
        curve.join(" "),
        start.elapsed().as_secs_f64()
    );
    if monotone && late < early {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn metrics_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_ssim = 0.0f64;
    for seed in 0..50 {
        let mut r = rng(300 + seed);
        let t: Vec<f32> = (0..512).map(|_| r.gen_range(-1.0f32..2.0)).collect();
        let p: Vec<f32> = t.iter().map(|&x| x + r.gen_range(-0.5f32..0.5)).collect();
        worst = worst
            .max((mae(&p, &t).unwrap() - bf_mae(&p, &t)).abs())
            .max((nrmse(&p, &t).unwrap() - bf_nrmse(&p, &t)).abs())
            .max((psnr(&p, &t).unwrap().value() - bf_psnr(&p, &t)).abs());
        let s = ssim3d(&p, &t, [8, 8, 8], 7, 0.01, 0.03).unwrap();
        worst_ssim = worst_ssim.max((s - bf_ssim(&p, &t, [8, 8, 8], 7)).abs());
    }
    let msg =
        format!("worst mae/nrmse/psnr deviation {worst:.1e}, ssim {worst_ssim:.1e} over 50 pairs");
    if worst <= 1e-7 && worst_ssim <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn run_cli(args: &[String]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_conebeam"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn tree_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

fn cli_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let geom = tmp.path().join("geom.json");
    fs::write(&geom, small_geometry(16, 8.0, 24, 8.0).to_json()).unwrap();
    let geom = geom.display().to_string();
    let mut runs = Vec::new();
    for (i, threads) in ["1", "8", "1", "8"].iter().enumerate() {
        let dir = tmp.path().join(format!("run{i}"));
        fs::create_dir(&dir).unwrap();
        let p = |name: &str| dir.join(name).display().to_string();
        let with = |rest: &[&str]| -> Vec<String> {
            ["--threads", threads, "--geometry", geom.as_str()]
                .iter()
                .chain(rest)
                .map(|s| s.to_string())
                .collect()
        };
        run_cli(&with(&[
            "dataset",
            "--samples",
            "4",
            "--seed",
            "9",
            "--out",
            &p("ds"),
        ]))?;
        run_cli(&with(&[
            "sweep",
            "--views",
            "1,2,3",
            "--method",
            "gpi-sart",
            "--seed",
            "7",
            "--samples",
            "2",
            "--out",
            &p("sweep.csv"),
        ]))?;
        let proj = format!("{}/samples/sample_0000/projections.gtf", p("ds"));
        run_cli(&with(&[
            "backproject",
            "--projections",
            &proj,
            "--out",
            &p("gpi.gtf"),
        ]))?;
        runs.push(tree_bytes(&dir));
    }
    let n_files = runs[0].len();
    if runs.iter().all(|r| *r == runs[0]) {
        Ok(format!("dataset + sweep + backproject: {n_files} files identical over 4 runs (threads 1, 8, 1, 8)"))
    } else {
        Err("outputs differ between runs".into())
    }
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("adjoint identity", adjoint_identity),
        ("dense-matrix oracle", dense_matrix),
        ("geometry exactness", geometry_exactness),
        ("ray oracle", ray_oracle),
        ("view-count trend", view_trend),
        ("metrics oracle", metrics_oracle),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(msg) => println!("PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}: {msg}");
            }
        }
        if name == "ray oracle" {
            println!("INFO  {}", ray_oracle_blob_info());
        }
    }
    println!("acceptance: {} passed, {failed} failed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
