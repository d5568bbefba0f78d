//! Browser demo: phantom slices, DRRs and sparse-view reconstructions on a
//! small grid, rendered to canvases by `www/index.js`.

use conebeam::recon::{normalized_gpi, sart_reconstruct_from, SartParams};
use conebeam::{
    backproject, forward_project, make_view_angles, phantom::random_anatomy_phantom,
    ConeBeamGeometry, DetectorSpec, ViewAngleSet, ViewMode, Volume3D, VolumeGrid,
};
use wasm_bindgen::prelude::*;

pub const DEMO_VOXELS: usize = 48;
pub const DEMO_SPACING: f64 = 5.0;
pub const DEMO_PIXELS: usize = 64;
pub const DEMO_PITCH: f64 = 6.0;

fn js_err(e: conebeam::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Demo state: one geometry and the current phantom.
#[wasm_bindgen]
pub struct Demo {
    geom: ConeBeamGeometry,
    phantom: Volume3D,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u64) -> Result<Demo, JsValue> {
        let geom = ConeBeamGeometry::default()
            .with_grids(
                DetectorSpec::square(DEMO_PIXELS, DEMO_PITCH),
                VolumeGrid::cubic(DEMO_VOXELS, DEMO_SPACING),
            )
            .map_err(js_err)?;
        let phantom = random_anatomy_phantom(seed, geom.volume).map_err(js_err)?;
        Ok(Demo { geom, phantom })
    }

    /// Regenerates the phantom from a new seed.
    pub fn reseed(&mut self, seed: u64) -> Result<(), JsValue> {
        self.phantom = random_anatomy_phantom(seed, self.geom.volume).map_err(js_err)?;
        Ok(())
    }

    pub fn volume_size(&self) -> usize {
        DEMO_VOXELS
    }

    pub fn detector_size(&self) -> usize {
        DEMO_PIXELS
    }

    /// Axial slice `k` of the phantom, x fastest.
    pub fn phantom_slice(&self, k: usize) -> Vec<f32> {
        self.phantom.slice_z(k.min(DEMO_VOXELS - 1))
    }

    /// DRR of the phantom at `theta_deg`, u fastest.
    pub fn drr(&self, theta_deg: f64) -> Result<Vec<f32>, JsValue> {
        let angles = ViewAngleSet::from_degrees(&[theta_deg]).map_err(js_err)?;
        let p = forward_project(&self.phantom, &self.geom, &angles).map_err(js_err)?;
        Ok(p.stack())
    }

    /// Axial slice of a reconstruction from `n_views` input views: the raw
    /// back-projection when `sart_sweeps` is 0, otherwise SART started from
    /// the normalised back-projection.
    pub fn recon_slice(
        &self,
        n_views: usize,
        sart_sweeps: usize,
        k: usize,
    ) -> Result<Vec<f32>, JsValue> {
        let angles = make_view_angles(n_views, ViewMode::Input).map_err(js_err)?;
        let p = forward_project(&self.phantom, &self.geom, &angles).map_err(js_err)?;
        let x = if sart_sweeps == 0 {
            backproject(&p, &self.geom).map_err(js_err)?
        } else {
            let params = SartParams {
                iterations: sart_sweeps,
                ..SartParams::default()
            };
            let init = normalized_gpi(&p, &self.geom).map_err(js_err)?;
            sart_reconstruct_from(init, &p, &self.geom, &params, |_, _| {}).map_err(js_err)?
        };
        Ok(x.slice_z(k.min(DEMO_VOXELS - 1)))
    }
}
