//! Reconstruction quality against the number of input views.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sart::{normalized_gpi, sart_reconstruct, sart_reconstruct_from, SartParams};
use crate::backprojector::backproject;
use crate::dataset::{
    denormalize, load_truth_volume, normalize, DatasetManifest, ScaleRecord, Split,
};
use crate::error::{Error, Result};
use crate::geometry::{make_view_angles, ConeBeamGeometry, ViewMode};
use crate::metrics::evaluate;
use crate::projector::forward_project;
use crate::volume::{ProjectionSet, Volume3D};

/// View counts of the reference sweep.
pub const DEFAULT_SWEEP_COUNTS: [usize; 7] = [1, 2, 3, 10, 30, 60, 120];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReconMethod {
    /// Raw back-projection, min-max mapped onto the truth's range.
    GpiOnly,
    /// SART started from the geometry-normalised GPI.
    GpiSart,
    /// SART started from zero.
    Sart,
}

impl std::str::FromStr for ReconMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gpi-only" | "gpi" => Ok(ReconMethod::GpiOnly),
            "gpi-sart" => Ok(ReconMethod::GpiSart),
            "sart" => Ok(ReconMethod::Sart),
            other => Err(Error::Param(format!(
                "unknown method {other:?} (expected gpi-only, gpi-sart or sart)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub method: ReconMethod,
    pub sart: SartParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub views: usize,
    pub mae: f64,
    pub nrmse: f64,
    pub ssim: f64,
    pub psnr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub n_samples: usize,
    pub sample_ids: Vec<String>,
    pub rows: Vec<SweepRow>,
}

/// Reconstructs a volume from `projections` with the chosen method.
/// `truth_scale` is only consulted by [`ReconMethod::GpiOnly`].
pub fn reconstruct(
    projections: &ProjectionSet,
    geom: &ConeBeamGeometry,
    config: &SweepConfig,
    truth_scale: &ScaleRecord,
) -> Result<Volume3D> {
    match config.method {
        ReconMethod::GpiOnly => {
            let gpi = backproject(projections, geom)?;
            let (n, _) = normalize(&gpi.data)?;
            Volume3D::from_data(gpi.grid, denormalize(&n, truth_scale))
        }
        ReconMethod::GpiSart => {
            let init = normalized_gpi(projections, geom)?;
            sart_reconstruct_from(init, projections, geom, &config.sart, |_, _| {})
        }
        ReconMethod::Sart => sart_reconstruct(projections, geom, &config.sart),
    }
}

/// Sweeps `counts` over ground-truth volumes, averaging the four metrics
/// over samples for every count.
pub fn view_sweep(
    truths: &[Volume3D],
    ids: &[String],
    geom: &ConeBeamGeometry,
    counts: &[usize],
    config: &SweepConfig,
) -> Result<SweepReport> {
    if counts.is_empty() {
        return Err(Error::Param(
            "view sweep needs at least one view count".into(),
        ));
    }
    if truths.is_empty() {
        return Err(Error::Param(
            "view sweep needs at least one ground-truth volume".into(),
        ));
    }
    config.sart.validate()?;
    let mut rows = Vec::with_capacity(counts.len());
    for &n in counts {
        let angles = make_view_angles(n, ViewMode::Input)?;
        let mut acc = [0.0f64; 4];
        for truth in truths {
            let (_, scale) = normalize(&truth.data)?;
            let p = forward_project(truth, geom, &angles)?;
            let x = reconstruct(&p, geom, config, &scale)?;
            let m = evaluate(&x.data, &truth.data, truth.grid.dims)?;
            acc[0] += m.mae;
            acc[1] += m.nrmse;
            acc[2] += m.ssim;
            acc[3] += m.psnr.unwrap_or(f64::INFINITY);
        }
        let k = truths.len() as f64;
        rows.push(SweepRow {
            views: n,
            mae: acc[0] / k,
            nrmse: acc[1] / k,
            ssim: acc[2] / k,
            psnr: acc[3] / k,
        });
    }
    Ok(SweepReport {
        config: *config,
        n_samples: truths.len(),
        sample_ids: ids.to_vec(),
        rows,
    })
}

/// Sweep over the test split of a stored dataset.
pub fn view_sweep_dataset(
    manifest_path: &Path,
    counts: &[usize],
    config: &SweepConfig,
) -> Result<SweepReport> {
    let (manifest, root) = DatasetManifest::load(manifest_path)?;
    let mut truths = Vec::new();
    let mut ids = Vec::new();
    for rec in manifest.split(Split::Test) {
        truths.push(load_truth_volume(&root, rec)?);
        ids.push(rec.id.clone());
    }
    if truths.is_empty() {
        return Err(Error::Data(format!(
            "{} has no test samples",
            manifest_path.display()
        )));
    }
    view_sweep(&truths, &ids, &manifest.geometry, counts, config)
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("views,mae,nrmse,ssim,psnr\n");
        for r in &self.rows {
            writeln!(s, "{},{},{},{},{}", r.views, r.mae, r.nrmse, r.ssim, r.psnr).unwrap();
        }
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:>6} {:>12} {:>10} {:>8} {:>9}\n",
            "views", "mae", "nrmse", "ssim", "psnr(dB)"
        );
        for r in &self.rows {
            writeln!(
                s,
                "{:>6} {:>12.6} {:>10.5} {:>8.5} {:>9.4}",
                r.views, r.mae, r.nrmse, r.ssim, r.psnr
            )
            .unwrap();
        }
        s
    }

    /// gnuplot script plotting all four metrics from `csv_name`.
    pub fn gnuplot_script(&self, csv_name: &str) -> String {
        format!(
            "set datafile separator ','\n\
             set key autotitle columnhead\n\
             set logscale x\n\
             set xlabel 'number of projections'\n\
             set multiplot layout 2,2\n\
             plot '{csv_name}' using 1:2 with linespoints\n\
             plot '{csv_name}' using 1:3 with linespoints\n\
             plot '{csv_name}' using 1:4 with linespoints\n\
             plot '{csv_name}' using 1:5 with linespoints\n\
             unset multiplot\n"
        )
    }
}
