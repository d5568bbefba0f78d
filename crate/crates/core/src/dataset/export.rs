use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::gtf::{write_projections, write_volume};
use super::{
    load_truth_projections, load_truth_volume, normalize, DatasetManifest, ScaleRecord, Split,
};
use crate::backprojector::make_gpi_pair;
use crate::error::{Error, Result};
use crate::geometry::{make_view_angles, ConeBeamGeometry, ViewAngleSet, ViewMode};
use crate::projector::forward_project;
use crate::volume::{ProjectionSet, Volume3D};

pub const LEARNED_MANIFEST_NAME: &str = "learned_manifest.json";

/// Tensors of one sample for the learned refinement stage. All files are
/// normalised to `[-1, 1]` per tensor; the scale records invert that.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedSample {
    pub id: String,
    pub split: Split,
    pub volume: String,
    pub volume_scale: ScaleRecord,
    pub gpi_src: String,
    pub gpi_src_scale: ScaleRecord,
    pub gpi_gen: String,
    pub gpi_gen_scale: ScaleRecord,
    pub src_projections: String,
    pub src_projection_scale: ScaleRecord,
    pub gen_projections: String,
    pub gen_projection_scale: ScaleRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedManifest {
    pub geometry: ConeBeamGeometry,
    pub n_input_views: usize,
    pub src_angles_deg: ViewAngleSet,
    pub gen_angles_deg: ViewAngleSet,
    pub samples: Vec<LearnedSample>,
}

/// Input views for a sample: taken from the stored generated ring when the
/// input angles are part of it, otherwise projected from the truth volume.
fn source_views(
    truth: &Volume3D,
    gen: &ProjectionSet,
    src_angles: &ViewAngleSet,
    geom: &ConeBeamGeometry,
) -> Result<ProjectionSet> {
    let picked: Option<Vec<_>> = src_angles
        .as_slice()
        .iter()
        .map(|&a| {
            gen.views()
                .iter()
                .find(|v| (v.theta - a).abs() < 1e-9)
                .cloned()
        })
        .collect();
    match picked {
        Some(views) => ProjectionSet::new(views),
        None => forward_project(truth, geom, src_angles),
    }
}

fn normalized_volume(v: &Volume3D) -> Result<(Volume3D, ScaleRecord)> {
    let (data, scale) = normalize(&v.data)?;
    Ok((Volume3D::from_data(v.grid, data)?, scale))
}

fn normalized_projections(p: &ProjectionSet) -> Result<(ProjectionSet, ScaleRecord)> {
    let (data, scale) = normalize(&p.stack())?;
    Ok((
        ProjectionSet::from_stack(p.detector(), p.angles(), data)?,
        scale,
    ))
}

/// Writes paired `(gpi_src, gpi_gen, volume)` tensors plus both projection
/// sets for every sample of a dataset.
pub fn export_learned(
    manifest_path: &Path,
    n_input_views: usize,
    out_dir: &Path,
) -> Result<LearnedManifest> {
    let (manifest, root) = DatasetManifest::load(manifest_path)?;
    let geom = manifest.geometry;
    let src_angles = make_view_angles(n_input_views, ViewMode::Input)?;
    fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;

    let mut samples = Vec::with_capacity(manifest.samples.len());
    for rec in &manifest.samples {
        let with_id = |e: Error| Error::Data(format!("sample {}: {e}", rec.id));
        let truth = load_truth_volume(&root, rec).map_err(with_id)?;
        let gen = load_truth_projections(&root, rec).map_err(with_id)?;
        let src = source_views(&truth, &gen, &src_angles, &geom)?;
        let pair = make_gpi_pair(&src, &gen, &geom)?;

        let rel_dir = PathBuf::from(&rec.id);
        let dir = out_dir.join(&rel_dir);
        fs::create_dir_all(&dir)
            .map_err(|e| with_id(Error::io(format!("creating {}", dir.display()), e)))?;
        let rel = |name: &str| format!("{}/{name}", rec.id);

        let (vol_n, volume_scale) = normalized_volume(&truth)?;
        let (gs_n, gpi_src_scale) = normalized_volume(&pair.gpi_src)?;
        let (gg_n, gpi_gen_scale) = normalized_volume(&pair.gpi_gen)?;
        let (sp_n, src_projection_scale) = normalized_projections(&src)?;
        let (gp_n, gen_projection_scale) = normalized_projections(&gen)?;

        write_volume(&out_dir.join(rel("volume.gtf")), &vol_n, Some(volume_scale))
            .map_err(with_id)?;
        write_volume(
            &out_dir.join(rel("gpi_src.gtf")),
            &gs_n,
            Some(gpi_src_scale),
        )
        .map_err(with_id)?;
        write_volume(
            &out_dir.join(rel("gpi_gen.gtf")),
            &gg_n,
            Some(gpi_gen_scale),
        )
        .map_err(with_id)?;
        write_projections(
            &out_dir.join(rel("src_projections.gtf")),
            &sp_n,
            Some(src_projection_scale),
        )
        .map_err(with_id)?;
        write_projections(
            &out_dir.join(rel("gen_projections.gtf")),
            &gp_n,
            Some(gen_projection_scale),
        )
        .map_err(with_id)?;

        samples.push(LearnedSample {
            id: rec.id.clone(),
            split: rec.split,
            volume: rel("volume.gtf"),
            volume_scale,
            gpi_src: rel("gpi_src.gtf"),
            gpi_src_scale,
            gpi_gen: rel("gpi_gen.gtf"),
            gpi_gen_scale,
            src_projections: rel("src_projections.gtf"),
            src_projection_scale,
            gen_projections: rel("gen_projections.gtf"),
            gen_projection_scale,
        });
    }

    let learned = LearnedManifest {
        geometry: geom,
        n_input_views,
        src_angles_deg: src_angles,
        gen_angles_deg: manifest.gen_angles_deg.clone(),
        samples,
    };
    let path = out_dir.join(LEARNED_MANIFEST_NAME);
    let text = serde_json::to_string_pretty(&learned).expect("manifest serializes");
    fs::write(&path, text + "\n")
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    Ok(learned)
}
