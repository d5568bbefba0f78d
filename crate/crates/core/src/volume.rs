use crate::error::{Error, Result};
use crate::geometry::{ConeBeamGeometry, DetectorSpec, ViewAngleSet, VolumeGrid};

/// Voxel intensities on a [`VolumeGrid`], stored `(z, y, x)` with x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume3D {
    pub grid: VolumeGrid,
    pub data: Vec<f32>,
}

impl Volume3D {
    pub fn zeros(grid: VolumeGrid) -> Self {
        Volume3D {
            data: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn filled(grid: VolumeGrid, value: f32) -> Self {
        Volume3D {
            data: vec![value; grid.len()],
            grid,
        }
    }

    pub fn from_data(grid: VolumeGrid, data: Vec<f32>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::Shape(format!(
                "volume data has {} elements, grid {:?} needs {}",
                data.len(),
                grid.dims,
                grid.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Volume3D { grid, data })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.grid.dims
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f32 {
        self.data[self.grid.index(i, j, k)]
    }

    pub fn scaled(&self, factor: f32) -> Self {
        Volume3D {
            grid: self.grid,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Checks that the volume lives on the geometry's voxel grid.
    pub fn check_grid(&self, geom: &ConeBeamGeometry) -> Result<()> {
        if self.grid.dims != geom.volume.dims {
            return Err(Error::Shape(format!(
                "volume dims {:?} (x,y,z) do not match geometry volume dims {:?}",
                self.grid.dims, geom.volume.dims
            )));
        }
        if self.grid.spacing != geom.volume.spacing {
            return Err(Error::Shape(format!(
                "volume spacing {:?} does not match geometry spacing {:?}",
                self.grid.spacing, geom.volume.spacing
            )));
        }
        Ok(())
    }

    /// Axis-z slice as a row-major `ny × nx` image.
    pub fn slice_z(&self, k: usize) -> Vec<f32> {
        let [nx, ny, _] = self.grid.dims;
        self.data[k * nx * ny..(k + 1) * nx * ny].to_vec()
    }
}

/// One detector image at view angle `theta`, stored `(v, u)` with u fastest.
/// Values are line integrals in intensity·mm.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection2D {
    pub theta: f64,
    pub detector: DetectorSpec,
    pub data: Vec<f32>,
}

impl Projection2D {
    pub fn zeros(detector: DetectorSpec, theta: f64) -> Self {
        Projection2D {
            theta,
            detector,
            data: vec![0.0; detector.len()],
        }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f32 {
        self.data[b * self.detector.nu + a]
    }
}

/// Projections sharing one detector, in strictly ascending view angle.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSet {
    angles: ViewAngleSet,
    views: Vec<Projection2D>,
}

impl ProjectionSet {
    pub fn new(views: Vec<Projection2D>) -> Result<Self> {
        let first = views
            .first()
            .ok_or_else(|| Error::Shape("empty projection set".into()))?;
        let detector = first.detector;
        for (i, p) in views.iter().enumerate() {
            if p.detector != detector {
                return Err(Error::Shape(format!(
                    "view {i} detector {:?} differs from view 0 detector {:?}",
                    p.detector, detector
                )));
            }
            if p.data.len() != detector.len() {
                return Err(Error::Shape(format!(
                    "view {i} has {} pixels, detector needs {}",
                    p.data.len(),
                    detector.len()
                )));
            }
            if let Some(index) = p.data.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    index: i * detector.len() + index,
                });
            }
        }
        let angles = ViewAngleSet::new(views.iter().map(|p| p.theta).collect())?;
        Ok(ProjectionSet { angles, views })
    }

    /// Builds a set from a `(view, v, u)` buffer.
    pub fn from_stack(
        detector: DetectorSpec,
        angles: &ViewAngleSet,
        data: Vec<f32>,
    ) -> Result<Self> {
        let per = detector.len();
        if data.len() != per * angles.len() {
            return Err(Error::Shape(format!(
                "projection stack has {} values, expected {} views × {}×{} pixels",
                data.len(),
                angles.len(),
                detector.nv,
                detector.nu
            )));
        }
        let views = angles
            .as_slice()
            .iter()
            .zip(data.chunks_exact(per.max(1)))
            .map(|(&theta, chunk)| Projection2D {
                theta,
                detector,
                data: chunk.to_vec(),
            })
            .collect();
        ProjectionSet::new(views)
    }

    pub fn uniform(detector: DetectorSpec, angles: &ViewAngleSet, value: f32) -> Self {
        let views = angles
            .as_slice()
            .iter()
            .map(|&theta| Projection2D {
                theta,
                detector,
                data: vec![value; detector.len()],
            })
            .collect();
        ProjectionSet {
            angles: angles.clone(),
            views,
        }
    }

    pub fn angles(&self) -> &ViewAngleSet {
        &self.angles
    }

    pub fn views(&self) -> &[Projection2D] {
        &self.views
    }

    pub fn views_mut(&mut self) -> &mut [Projection2D] {
        &mut self.views
    }

    pub fn detector(&self) -> DetectorSpec {
        self.views[0].detector
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    /// Flattened `(view, v, u)` buffer.
    pub fn stack(&self) -> Vec<f32> {
        self.views
            .iter()
            .flat_map(|p| p.data.iter().copied())
            .collect()
    }

    /// Merges two sets into one ascending set. Shared angles are an error.
    pub fn union(&self, other: &ProjectionSet) -> Result<Self> {
        let mut views: Vec<Projection2D> = self.views.iter().chain(&other.views).cloned().collect();
        views.sort_by(|a, b| a.theta.total_cmp(&b.theta));
        ProjectionSet::new(views)
    }

    pub fn check_detector(&self, geom: &ConeBeamGeometry) -> Result<()> {
        if self.detector() != geom.detector {
            return Err(Error::Shape(format!(
                "projection detector {}x{} @ ({}, {}) mm does not match geometry detector {}x{} @ ({}, {}) mm",
                self.detector().nu,
                self.detector().nv,
                self.detector().pitch_u,
                self.detector().pitch_v,
                geom.detector.nu,
                geom.detector.nv,
                geom.detector.pitch_u,
                geom.detector.pitch_v
            )));
        }
        Ok(())
    }
}

/// Inner product accumulated in f64.
pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

pub fn norm2(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}
