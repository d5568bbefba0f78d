mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use common::*;
use conebeam::dataset::gtf::{
    decode_gtf, encode_gtf, read_gtf, read_meta, read_projections, read_volume, sidecar_path,
    write_gtf, Tensor, TensorMeta,
};
use conebeam::dataset::{
    build_dataset, denormalize_f64, export_learned, load_truth_projections, load_truth_volume,
    normalize, normalize_f64, split_counts, DatasetConfig, DatasetManifest, Split,
    LEARNED_MANIFEST_NAME, MANIFEST_NAME,
};
use conebeam::phantom::random_anatomy_phantom;
use conebeam::{backproject, forward_project, make_view_angles, ViewMode};
use proptest::prelude::*;
use rand::Rng;

fn tiny_geometry() -> conebeam::ConeBeamGeometry {
    small_geometry(12, 10.0, 16, 12.0)
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for e in walk(dir) {
        out.push((
            e.strip_prefix(dir).unwrap().display().to_string(),
            fs::read(&e).unwrap(),
        ));
    }
    out.sort();
    out
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut v = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            v.extend(walk(&p));
        } else {
            v.push(p);
        }
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gtf_roundtrip_is_bitwise(dims in prop::collection::vec(1usize..6, 2..=4), seed in any::<u64>()) {
        let n: usize = dims.iter().product();
        let mut r = rng(seed);
        let data: Vec<f32> = (0..n).map(|_| f32::from_bits(r.gen::<u32>() & 0x7f7f_ffff)).collect();
        let t = Tensor::new(dims.clone(), data).unwrap();
        let bytes = encode_gtf(&t);
        prop_assert_eq!(bytes.len(), 64 + 8 * dims.len() + 4 * n);
        let back = decode_gtf(&bytes, Path::new("mem.gtf")).unwrap();
        prop_assert_eq!(back.dims, t.dims);
        prop_assert!(back.data.iter().zip(&t.data).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn normalize_stays_in_range_and_inverts(data in prop::collection::vec(-1000.0..1000.0f64, 2..200)) {
        let (n, rec) = normalize_f64(&data).unwrap();
        prop_assert!(n.iter().all(|&x| (-1.0..=1.0).contains(&x)));
        let back = denormalize_f64(&n, &rec);
        for (a, b) in back.iter().zip(&data) {
            prop_assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn split_counts_cover_all(n in 2usize..500, ratio in 0.01..0.99f64) {
        let (train, test) = split_counts(n, ratio);
        prop_assert_eq!(train + test, n);
        prop_assert!(train >= 1 && test >= 1);
    }
}

#[test]
fn reference_splits() {
    assert_eq!(split_counts(10, 0.8), (8, 2));
    assert_eq!(split_counts(5, 0.8), (4, 1));
    assert_eq!(split_counts(2, 0.8), (1, 1));
    assert_eq!(split_counts(2, 0.99), (1, 1));
}

#[test]
fn normalize_f32_path() {
    let data: Vec<f32> = (0..=100).map(|x| x as f32).collect();
    let (n, rec) = normalize(&data).unwrap();
    assert_eq!(n[0], -1.0);
    assert_eq!(n[100], 1.0);
    assert!(!rec.degenerate);
    let (z, rec) = normalize(&[3.0f32; 8]).unwrap();
    assert!(z.iter().all(|&x| x == 0.0) && rec.degenerate);
}

#[test]
fn dataset_is_deterministic_and_split() {
    let g = tiny_geometry();
    let cfg = DatasetConfig::new(5, 42);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = build_dataset(&cfg, &g, a.path()).unwrap();
    build_dataset(&cfg, &g, b.path()).unwrap();
    assert_eq!(files(a.path()), files(b.path()));

    assert_eq!((ma.n_train, ma.n_test), (4, 1));
    let train: BTreeSet<_> = ma.split(Split::Train).map(|s| s.id.clone()).collect();
    let test: BTreeSet<_> = ma.split(Split::Test).map(|s| s.id.clone()).collect();
    assert!(train.is_disjoint(&test));
    assert_eq!(train.len() + test.len(), 5);

    let (loaded, root) = DatasetManifest::load(&a.path().join(MANIFEST_NAME)).unwrap();
    assert_eq!(loaded.samples.len(), 5);
    let rec = &loaded.samples[0];
    // stored tensors are normalised f32, so the roundtrip is exact up to
    // f32 rounding of the min-max map
    let vol = load_truth_volume(&root, rec).unwrap();
    assert_eq!(vol.grid, g.volume);
    let fresh = random_anatomy_phantom(rec.phantom_seed, g.volume).unwrap();
    let range = rec.volume_scale.hi - rec.volume_scale.lo;
    for (a, b) in vol.data.iter().zip(&fresh.data) {
        assert!((a - b).abs() as f64 <= 1e-6 * range);
    }
    let p = load_truth_projections(&root, rec).unwrap();
    assert_eq!(p.len(), 12);
    let again = forward_project(&fresh, &g, p.angles()).unwrap();
    let range = rec.projection_scale.hi - rec.projection_scale.lo;
    for (a, b) in p.stack().iter().zip(again.stack()) {
        assert!((a - b).abs() as f64 <= 1e-6 * range);
    }

    let c = tempfile::tempdir().unwrap();
    build_dataset(&DatasetConfig::new(5, 43), &g, c.path()).unwrap();
    assert_ne!(files(a.path()), files(c.path()));
}

#[test]
fn dataset_rejects_empty_request() {
    let d = tempfile::tempdir().unwrap();
    assert!(build_dataset(&DatasetConfig::new(0, 1), &tiny_geometry(), d.path()).is_err());
}

#[test]
fn missing_sample_file_is_reported() {
    let g = tiny_geometry();
    let d = tempfile::tempdir().unwrap();
    let m = build_dataset(&DatasetConfig::new(2, 1), &g, d.path()).unwrap();
    let victim = d.path().join(&m.samples[1].volume);
    fs::remove_file(&victim).unwrap();
    let err = DatasetManifest::load(&d.path().join(MANIFEST_NAME))
        .unwrap_err()
        .to_string();
    assert!(err.contains(&m.samples[1].volume), "{err}");
}

#[test]
fn export_learned_writes_gpi_pairs() {
    let g = tiny_geometry();
    let d = tempfile::tempdir().unwrap();
    build_dataset(&DatasetConfig::new(3, 7), &g, d.path()).unwrap();
    let out = tempfile::tempdir().unwrap();
    let lm = export_learned(&d.path().join(MANIFEST_NAME), 2, out.path()).unwrap();
    assert_eq!(lm.samples.len(), 3);
    assert!(out.path().join(LEARNED_MANIFEST_NAME).is_file());

    let (manifest, root) = DatasetManifest::load(&d.path().join(MANIFEST_NAME)).unwrap();
    let s = &lm.samples[0];
    let truth = load_truth_volume(&root, &manifest.samples[0]).unwrap();
    let gen = load_truth_projections(&root, &manifest.samples[0]).unwrap();
    let src_angles = make_view_angles(2, ViewMode::Input).unwrap();
    let (stored_src, _) = read_projections(&out.path().join(&s.src_projections)).unwrap();
    assert_eq!(stored_src.angles(), &src_angles);
    // 0 and 90 degrees are on the generated ring, so the input views are copies
    let picked: Vec<_> = gen
        .views()
        .iter()
        .filter(|v| src_angles.as_slice().contains(&v.theta))
        .cloned()
        .collect();
    let src = conebeam::ProjectionSet::new(picked).unwrap();
    let raw_src = backproject(&src, &g).unwrap();
    let (gpi_src, scale) = read_volume(&out.path().join(&s.gpi_src), None).unwrap();
    let (want, _) = normalize(&raw_src.data).unwrap();
    assert_eq!(gpi_src.data, want);
    assert!(scale.is_some());
    let (vol, vscale) = read_volume(&out.path().join(&s.volume), None).unwrap();
    assert_eq!(vol.data, normalize(&truth.data).unwrap().0);
    assert!(vscale.is_some());
    for f in [&s.gpi_gen, &s.gen_projections] {
        let path = out.path().join(f);
        assert!(read_gtf(&path).is_ok());
        assert!(matches!(
            read_meta(&path).unwrap(),
            TensorMeta::Volume { .. } | TensorMeta::Projections { .. }
        ));
        assert!(sidecar_path(&path).is_file());
    }
}

#[test]
fn truncated_and_foreign_files_fail_cleanly() {
    let d = tempfile::tempdir().unwrap();
    let path = d.path().join("t.gtf");
    write_gtf(&path, &Tensor::new(vec![2, 3], vec![1.0; 6]).unwrap()).unwrap();
    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() - 2]).unwrap();
    assert!(read_gtf(&path).unwrap_err().to_string().contains("t.gtf"));
    fs::write(
        &path,
        b"not a tensor at all, definitely longer than sixty-four bytes of header ....",
    )
    .unwrap();
    assert!(read_gtf(&path).is_err());
}
