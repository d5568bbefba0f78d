//! Geometric back-projection.
//!
//! Each voxel centre is mapped onto every detector view with the cone-beam
//! projection of [`crate::geometry`], the detector is sampled bilinearly and
//! the samples are summed without any weighting. The result is a
//! geometry-preserving image (GPI): every pixel intensity smeared back along
//! its ray line.

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::{ConeBeamGeometry, ViewAngleSet};
use crate::projector::bilinear_footprint;
use crate::volume::{Projection2D, ProjectionSet, Volume3D};

/// Unweighted sum over views of the bilinearly sampled detector value at the
/// projected position of every voxel centre. Views are summed in ascending
/// angle order; detector positions off the panel contribute nothing.
pub fn backproject(projections: &ProjectionSet, geom: &ConeBeamGeometry) -> Result<Volume3D> {
    projections.check_detector(geom)?;
    Ok(backproject_views(projections.views(), geom))
}

/// Back-projection of a single view; the building block of SART.
pub fn backproject_view(view: &Projection2D, geom: &ConeBeamGeometry) -> Result<Volume3D> {
    if view.detector != geom.detector {
        return Err(crate::error::Error::Shape(format!(
            "view detector {:?} does not match geometry detector {:?}",
            view.detector, geom.detector
        )));
    }
    Ok(backproject_views(std::slice::from_ref(view), geom))
}

fn backproject_views(views: &[Projection2D], geom: &ConeBeamGeometry) -> Volume3D {
    let grid = geom.volume;
    let det = geom.detector;
    let [nx, ny, _] = grid.dims;
    let trig: Vec<(f64, f64)> = views.iter().map(|p| p.theta.sin_cos()).collect();
    let mut out = Volume3D::zeros(grid);
    out.data
        .par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(k, slab)| {
            for j in 0..ny {
                for i in 0..nx {
                    let centre = grid.voxel_center(i, j, k);
                    let mut acc = 0.0f64;
                    for (view, &(sin, cos)) in views.iter().zip(&trig) {
                        let (u, v) = geom.project_point(centre, sin, cos);
                        let fp = bilinear_footprint(&det, u, v);
                        for &(pix, w) in &fp.taps[..fp.len] {
                            acc += w * view.data[pix] as f64;
                        }
                    }
                    slab[j * nx + i] = acc as f32;
                }
            }
        });
    out
}

/// The two geometry-preserving images fed to volumetric refinement: one
/// from the measured source views and one from the synthesised views.
#[derive(Debug, Clone, PartialEq)]
pub struct GpiPair {
    pub gpi_src: Volume3D,
    pub gpi_gen: Volume3D,
    pub src_angles: ViewAngleSet,
    pub gen_angles: ViewAngleSet,
}

/// Back-projects the source and generated sets independently.
pub fn make_gpi_pair(
    src: &ProjectionSet,
    gen: &ProjectionSet,
    geom: &ConeBeamGeometry,
) -> Result<GpiPair> {
    let gpi_src = backproject(src, geom)?;
    let gpi_gen = backproject(gen, geom)?;
    Ok(GpiPair {
        gpi_src,
        gpi_gen,
        src_angles: src.angles().clone(),
        gen_angles: gen.angles().clone(),
    })
}
