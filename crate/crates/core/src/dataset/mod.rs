//! Synthetic dataset pipeline: phantom generation, DRR synthesis,
//! per-sample min-max normalisation, train/test split and GTF storage.

mod export;
pub mod gtf;
mod normalize;
mod resample;

pub use export::{export_learned, LearnedManifest, LearnedSample, LEARNED_MANIFEST_NAME};
pub use normalize::{denormalize, denormalize_f64, normalize, normalize_f64, ScaleRecord};
pub use resample::resample_volume;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    make_view_angles, ConeBeamGeometry, ViewAngleSet, ViewMode, GENERATED_VIEWS,
};
use crate::phantom::random_anatomy_phantom;
use crate::projector::forward_project;
use crate::rng::CounterRng;
use crate::volume::{ProjectionSet, Volume3D};

pub const MANIFEST_NAME: &str = "manifest.json";
pub const DEFAULT_SPLIT_RATIO: f64 = 0.8;
const SPLIT_STREAM: u64 = u64::MAX;
const NOISE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub n_input_views: usize,
    pub m_gen_views: usize,
    pub split_ratio: f64,
    /// Standard deviation of additive Gaussian noise on the DRRs, in
    /// intensity·mm. Zero disables noise.
    pub noise_sigma: f64,
}

impl DatasetConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        DatasetConfig {
            n_samples,
            seed,
            n_input_views: 1,
            m_gen_views: GENERATED_VIEWS,
            split_ratio: DEFAULT_SPLIT_RATIO,
            noise_sigma: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub phantom_seed: u64,
    pub split: Split,
    pub volume: String,
    pub volume_scale: ScaleRecord,
    pub projections: String,
    pub projection_scale: ScaleRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub geometry: ConeBeamGeometry,
    pub seed: u64,
    pub split_ratio: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub n_input_views: usize,
    pub gen_angles_deg: ViewAngleSet,
    pub noise_sigma: f64,
    pub samples: Vec<SampleRecord>,
}

/// Train/test counts: `round(ratio · n)` training samples, clamped so both
/// splits are non-empty whenever `n >= 2`.
pub fn split_counts(n: usize, ratio: f64) -> (usize, usize) {
    if n <= 1 {
        return (n, 0);
    }
    let train = ((ratio * n as f64).round() as usize).clamp(1, n - 1);
    (train, n - train)
}

/// Seed of the phantom behind sample `index`.
pub fn sample_seed(seed: u64, index: usize) -> u64 {
    CounterRng::new(seed).at(index as u64)
}

fn gaussian_noise(rng: &mut CounterRng) -> f64 {
    // Box-Muller, first branch only
    let u1 = 1.0 - rng.next_f64();
    let u2 = rng.next_f64();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Ground-truth volume and its DRR set for one sample.
pub fn synthesize_sample(
    geom: &ConeBeamGeometry,
    phantom_seed: u64,
    angles: &ViewAngleSet,
    noise_sigma: f64,
) -> Result<(Volume3D, ProjectionSet)> {
    let volume = random_anatomy_phantom(phantom_seed, geom.volume)?;
    let mut projections = forward_project(&volume, geom, angles)?;
    if noise_sigma > 0.0 {
        let mut rng = CounterRng::derive(phantom_seed, NOISE_STREAM);
        for view in projections.views_mut() {
            for px in view.data.iter_mut() {
                *px = (*px as f64 + noise_sigma * gaussian_noise(&mut rng)) as f32;
            }
        }
    }
    Ok((volume, projections))
}

/// Generates `config.n_samples` phantoms with their DRRs under `out_dir`.
/// The manifest is written last, after every sample file exists.
pub fn build_dataset(
    config: &DatasetConfig,
    geom: &ConeBeamGeometry,
    out_dir: &Path,
) -> Result<DatasetManifest> {
    if config.n_samples == 0 {
        return Err(Error::Param("dataset needs at least one sample".into()));
    }
    if !(config.split_ratio > 0.0 && config.split_ratio <= 1.0) {
        return Err(Error::Param(format!(
            "split ratio must be in (0, 1], got {}",
            config.split_ratio
        )));
    }
    if !(config.noise_sigma >= 0.0 && config.noise_sigma.is_finite()) {
        return Err(Error::Param(format!(
            "noise sigma must be >= 0, got {}",
            config.noise_sigma
        )));
    }
    make_view_angles(config.n_input_views, ViewMode::Input)?;
    let gen_angles = make_view_angles(config.m_gen_views, ViewMode::Generated)?;

    let (n_train, n_test) = split_counts(config.n_samples, config.split_ratio);
    let mut order: Vec<usize> = (0..config.n_samples).collect();
    CounterRng::derive(config.seed, SPLIT_STREAM).shuffle(&mut order);
    let mut splits = vec![Split::Test; config.n_samples];
    for &i in &order[..n_train] {
        splits[i] = Split::Train;
    }

    fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    let samples = (0..config.n_samples)
        .into_par_iter()
        .map(|i| {
            let id = format!("sample_{i:04}");
            let phantom_seed = sample_seed(config.seed, i);
            let rel_dir = PathBuf::from("samples").join(&id);
            let dir = out_dir.join(&rel_dir);
            let with_id = |e: Error| Error::Data(format!("sample {id}: {e}"));
            fs::create_dir_all(&dir)
                .map_err(|e| with_id(Error::io(format!("creating {}", dir.display()), e)))?;
            let (volume, projections) =
                synthesize_sample(geom, phantom_seed, &gen_angles, config.noise_sigma)?;

            let (vnorm, volume_scale) = normalize(&volume.data)?;
            let vol_n = Volume3D::from_data(volume.grid, vnorm)?;
            let (pnorm, projection_scale) = normalize(&projections.stack())?;
            let proj_n = ProjectionSet::from_stack(projections.detector(), &gen_angles, pnorm)?;

            let vol_rel = rel_dir.join("volume.gtf");
            let proj_rel = rel_dir.join("projections.gtf");
            gtf::write_volume(&out_dir.join(&vol_rel), &vol_n, Some(volume_scale))
                .map_err(with_id)?;
            gtf::write_projections(&out_dir.join(&proj_rel), &proj_n, Some(projection_scale))
                .map_err(with_id)?;
            Ok(SampleRecord {
                id,
                phantom_seed,
                split: splits[i],
                volume: rel_string(&vol_rel),
                volume_scale,
                projections: rel_string(&proj_rel),
                projection_scale,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = DatasetManifest {
        geometry: *geom,
        seed: config.seed,
        split_ratio: config.split_ratio,
        n_train,
        n_test,
        n_input_views: config.n_input_views,
        gen_angles_deg: gen_angles,
        noise_sigma: config.noise_sigma,
        samples,
    };
    manifest.save(&out_dir.join(MANIFEST_NAME))?;
    Ok(manifest)
}

fn rel_string(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

impl DatasetManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n")
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    /// Loads a manifest and checks that every referenced file exists.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let manifest: DatasetManifest = serde_json::from_str(&text)
            .map_err(|e| Error::json(format!("parsing {}", path.display()), e))?;
        let root = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        for s in &manifest.samples {
            for rel in [&s.volume, &s.projections] {
                let p = root.join(rel);
                if !p.is_file() {
                    return Err(Error::Data(format!(
                        "sample {}: missing file {}",
                        s.id,
                        p.display()
                    )));
                }
            }
        }
        if manifest.n_train + manifest.n_test != manifest.samples.len() {
            return Err(Error::Data(format!(
                "{}: split counts {}+{} do not cover {} samples",
                path.display(),
                manifest.n_train,
                manifest.n_test,
                manifest.samples.len()
            )));
        }
        Ok((manifest, root))
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &SampleRecord> {
        self.samples.iter().filter(move |s| s.split == split)
    }
}

/// Ground-truth volume of a sample in original intensity units.
pub fn load_truth_volume(root: &Path, rec: &SampleRecord) -> Result<Volume3D> {
    let (v, _) = gtf::read_volume(&root.join(&rec.volume), None)?;
    Volume3D::from_data(v.grid, denormalize(&v.data, &rec.volume_scale))
}

/// Stored DRR set of a sample in original units (intensity·mm).
pub fn load_truth_projections(root: &Path, rec: &SampleRecord) -> Result<ProjectionSet> {
    let (p, _) = gtf::read_projections(&root.join(&rec.projections))?;
    ProjectionSet::from_stack(
        p.detector(),
        p.angles(),
        denormalize(&p.stack(), &rec.projection_scale),
    )
}
