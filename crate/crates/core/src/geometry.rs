//! Circular cone-beam coordinate system.
//!
//! The volume frame is centred on the isocenter. For a view angle `theta`
//! the point source sits at `d_so * (-sin θ, cos θ, 0)` and the flat detector
//! is perpendicular to the central ray at distance `d_sd` from the source.
//! The detector u-axis runs along `(cos θ, sin θ, 0)` and the v-axis along
//! `+z`. With this convention a point `(x, y, z)` lands on the detector at
//!
//! ```text
//!     depth = d_so + x sin θ - y cos θ
//!     u     = (x cos θ + y sin θ) * d_sd / depth
//!     v     = z * d_sd / depth
//! ```
//!
//! Voxel and pixel centres are addressed relative to the grid centre, so the
//! isocenter sits on the middle of both grids.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_D_SO: f64 = 1000.0;
pub const DEFAULT_D_SD: f64 = 1500.0;

/// Flat-panel detector sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub nu: usize,
    pub nv: usize,
    pub pitch_u: f64,
    pub pitch_v: f64,
}

impl DetectorSpec {
    pub fn square(n: usize, pitch: f64) -> Self {
        DetectorSpec {
            nu: n,
            nv: n,
            pitch_u: pitch,
            pitch_v: pitch,
        }
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Continuous pixel coordinate to detector millimetres.
    #[inline]
    pub fn pixel_to_uv(&self, a: f64, b: f64) -> (f64, f64) {
        (
            (a - (self.nu as f64 - 1.0) * 0.5) * self.pitch_u,
            (b - (self.nv as f64 - 1.0) * 0.5) * self.pitch_v,
        )
    }

    #[inline]
    pub fn uv_to_pixel(&self, u: f64, v: f64) -> (f64, f64) {
        (
            u / self.pitch_u + (self.nu as f64 - 1.0) * 0.5,
            v / self.pitch_v + (self.nv as f64 - 1.0) * 0.5,
        )
    }

    fn validate(&self) -> Result<()> {
        if self.nu == 0 || self.nv == 0 {
            return Err(Error::Geometry(format!(
                "detector pixel counts must be >= 1, got {}x{}",
                self.nu, self.nv
            )));
        }
        if !(self.pitch_u > 0.0 && self.pitch_u.is_finite())
            || !(self.pitch_v > 0.0 && self.pitch_v.is_finite())
        {
            return Err(Error::Geometry(format!(
                "detector pitch must be positive, got ({}, {})",
                self.pitch_u, self.pitch_v
            )));
        }
        Ok(())
    }
}

/// Regular voxel grid centred on the isocenter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeGrid {
    /// Voxel counts `(nx, ny, nz)`.
    pub dims: [usize; 3],
    /// Voxel spacing in mm along x, y, z.
    pub spacing: [f64; 3],
}

impl VolumeGrid {
    pub fn cubic(n: usize, spacing: f64) -> Self {
        VolumeGrid {
            dims: [n, n, n],
            spacing: [spacing; 3],
        }
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Linear index of voxel `(i, j, k)`; x varies fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims[1] + j) * self.dims[0] + i
    }

    /// Physical coordinate of the voxel centre along `axis`.
    #[inline]
    pub fn center(&self, axis: usize, i: usize) -> f64 {
        (i as f64 - (self.dims[axis] as f64 - 1.0) * 0.5) * self.spacing[axis]
    }

    #[inline]
    pub fn voxel_center(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.center(0, i), self.center(1, j), self.center(2, k)]
    }

    /// Half extent of the voxel-box bounding the grid, per axis.
    pub fn half_extent(&self) -> [f64; 3] {
        [
            self.dims[0] as f64 * self.spacing[0] * 0.5,
            self.dims[1] as f64 * self.spacing[1] * 0.5,
            self.dims[2] as f64 * self.spacing[2] * 0.5,
        ]
    }

    /// Largest in-plane distance of any voxel centre from the rotation axis.
    pub fn max_center_radius(&self) -> f64 {
        let hx = (self.dims[0] as f64 - 1.0) * 0.5 * self.spacing[0];
        let hy = (self.dims[1] as f64 - 1.0) * 0.5 * self.spacing[1];
        hx.hypot(hy)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::Geometry(format!(
                "volume voxel counts must be >= 1, got {:?}",
                self.dims
            )));
        }
        if self.spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Geometry(format!(
                "voxel spacing must be positive, got {:?}",
                self.spacing
            )));
        }
        Ok(())
    }
}

/// Validated circular cone-beam geometry. Lengths are in mm.
///
/// Field names double as the JSON keys of the geometry document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeometryDoc", into = "GeometryDoc")]
pub struct ConeBeamGeometry {
    pub d_so: f64,
    pub d_sd: f64,
    pub detector: DetectorSpec,
    pub volume: VolumeGrid,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryDoc {
    d_so: f64,
    d_sd: f64,
    detector_nu: usize,
    detector_nv: usize,
    detector_pitch_u: f64,
    detector_pitch_v: f64,
    volume_nx: usize,
    volume_ny: usize,
    volume_nz: usize,
    voxel_spacing_x: f64,
    voxel_spacing_y: f64,
    voxel_spacing_z: f64,
}

impl TryFrom<GeometryDoc> for ConeBeamGeometry {
    type Error = Error;

    fn try_from(d: GeometryDoc) -> Result<Self> {
        ConeBeamGeometry::new(
            d.d_so,
            d.d_sd,
            DetectorSpec {
                nu: d.detector_nu,
                nv: d.detector_nv,
                pitch_u: d.detector_pitch_u,
                pitch_v: d.detector_pitch_v,
            },
            VolumeGrid {
                dims: [d.volume_nx, d.volume_ny, d.volume_nz],
                spacing: [d.voxel_spacing_x, d.voxel_spacing_y, d.voxel_spacing_z],
            },
        )
    }
}

impl From<ConeBeamGeometry> for GeometryDoc {
    fn from(g: ConeBeamGeometry) -> Self {
        GeometryDoc {
            d_so: g.d_so,
            d_sd: g.d_sd,
            detector_nu: g.detector.nu,
            detector_nv: g.detector.nv,
            detector_pitch_u: g.detector.pitch_u,
            detector_pitch_v: g.detector.pitch_v,
            volume_nx: g.volume.dims[0],
            volume_ny: g.volume.dims[1],
            volume_nz: g.volume.dims[2],
            voxel_spacing_x: g.volume.spacing[0],
            voxel_spacing_y: g.volume.spacing[1],
            voxel_spacing_z: g.volume.spacing[2],
        }
    }
}

impl Default for ConeBeamGeometry {
    /// 128³ volume at 2 mm, 192² detector at 2 mm pitch.
    fn default() -> Self {
        ConeBeamGeometry::new(
            DEFAULT_D_SO,
            DEFAULT_D_SD,
            DetectorSpec::square(192, 2.0),
            VolumeGrid::cubic(128, 2.0),
        )
        .expect("default geometry is valid")
    }
}

impl ConeBeamGeometry {
    pub fn new(d_so: f64, d_sd: f64, detector: DetectorSpec, volume: VolumeGrid) -> Result<Self> {
        if !(d_so > 0.0 && d_so.is_finite()) || !(d_sd > 0.0 && d_sd.is_finite()) {
            return Err(Error::Geometry(format!(
                "distances must be positive, got d_so={d_so}, d_sd={d_sd}"
            )));
        }
        if d_so >= d_sd {
            return Err(Error::Geometry(format!("d_so >= d_sd ({d_so} >= {d_sd})")));
        }
        detector.validate()?;
        volume.validate()?;
        let radius = volume.max_center_radius();
        if radius >= d_so {
            return Err(Error::Geometry(format!(
                "voxel radius {radius:.3} mm >= d_so={d_so} mm (margin {:.3} mm): \
                 voxels can reach the source plane",
                d_so - radius
            )));
        }
        Ok(ConeBeamGeometry {
            d_so,
            d_sd,
            detector,
            volume,
        })
    }

    /// Reduced-size geometry used for fast tests: 64³ at 4 mm, 96² at 4 mm.
    pub fn desk() -> Self {
        ConeBeamGeometry::new(
            DEFAULT_D_SO,
            DEFAULT_D_SD,
            DetectorSpec::square(96, 4.0),
            VolumeGrid::cubic(64, 4.0),
        )
        .expect("desk geometry is valid")
    }

    /// Same source/detector distances, different grids.
    pub fn with_grids(&self, detector: DetectorSpec, volume: VolumeGrid) -> Result<Self> {
        ConeBeamGeometry::new(self.d_so, self.d_sd, detector, volume)
    }

    pub fn magnification(&self) -> f64 {
        self.d_sd / self.d_so
    }

    /// Distance from the source to the plane through `point` parallel to the
    /// detector, measured along the central ray.
    #[inline]
    pub fn depth(&self, point: [f64; 3], theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.d_so + point[0] * s - point[1] * c
    }

    /// Ray-projected detector position `(u, v)` in mm of a point.
    pub fn detector_coords(&self, point: [f64; 3], theta: f64) -> Result<(f64, f64)> {
        let (s, c) = theta.sin_cos();
        let depth = self.d_so + point[0] * s - point[1] * c;
        if depth.is_nan() || depth <= 0.0 {
            return Err(Error::BehindSource { denominator: depth });
        }
        let scale = self.d_sd / depth;
        Ok(((point[0] * c + point[1] * s) * scale, point[2] * scale))
    }

    /// Unchecked variant for kernels iterating over validated voxel grids.
    #[inline]
    pub(crate) fn project_point(&self, point: [f64; 3], sin: f64, cos: f64) -> (f64, f64) {
        let scale = self.d_sd / (self.d_so + point[0] * sin - point[1] * cos);
        ((point[0] * cos + point[1] * sin) * scale, point[2] * scale)
    }

    pub fn source_position(&self, theta: f64) -> [f64; 3] {
        let (s, c) = theta.sin_cos();
        [-self.d_so * s, self.d_so * c, 0.0]
    }

    /// World position of detector coordinate `(u, v)` at view `theta`.
    pub fn detector_point(&self, u: f64, v: f64, theta: f64) -> [f64; 3] {
        let (s, c) = theta.sin_cos();
        let offset = self.d_sd - self.d_so;
        [offset * s + u * c, -offset * c + u * s, v]
    }

    pub fn pixel_to_uv(&self, a: f64, b: f64) -> (f64, f64) {
        self.detector.pixel_to_uv(a, b)
    }

    pub fn uv_to_pixel(&self, u: f64, v: f64) -> (f64, f64) {
        self.detector.uv_to_pixel(u, v)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("geometry serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json("geometry document", e))
    }
}

/// Whether angles are used as network inputs or as the generation target set.
/// Input sets follow the AP / AP+lateral convention for one and two views;
/// generated sets are always evenly spaced from 0°.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViewMode {
    Input,
    Generated,
}

/// Number of target views synthesised from sparse inputs.
pub const GENERATED_VIEWS: usize = 12;

/// Strictly increasing view angles in `[0, 2π)`, stored in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewAngleSet {
    angles: Vec<f64>,
}

impl ViewAngleSet {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::Angles("empty angle set".into()));
        }
        for (i, &a) in angles.iter().enumerate() {
            if !(0.0..TAU).contains(&a) {
                return Err(Error::Angles(format!(
                    "angle {i} = {a} rad outside [0, 2π)"
                )));
            }
            if i > 0 && a <= angles[i - 1] {
                return Err(Error::Angles(format!(
                    "angles not strictly increasing at index {i} ({} then {a})",
                    angles[i - 1]
                )));
            }
        }
        Ok(ViewAngleSet { angles })
    }

    /// Builds a set from degrees, wrapping into `[0, 360)` and sorting.
    pub fn from_degrees(degrees: &[f64]) -> Result<Self> {
        let mut rad: Vec<f64> = degrees
            .iter()
            .map(|d| {
                if !d.is_finite() {
                    return f64::NAN;
                }
                let w = d.rem_euclid(360.0);
                let r = w.to_radians();
                if r >= TAU {
                    0.0
                } else {
                    r
                }
            })
            .collect();
        if rad.iter().any(|r| r.is_nan()) {
            return Err(Error::Angles(format!("non-finite angle in {degrees:?}")));
        }
        rad.sort_by(f64::total_cmp);
        ViewAngleSet::new(rad)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.angles
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.angles.iter().map(|a| a.to_degrees()).collect()
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Ascending union of two sets. Fails on shared angles.
    pub fn union(&self, other: &ViewAngleSet) -> Result<Self> {
        let mut all: Vec<f64> = self.angles.iter().chain(&other.angles).copied().collect();
        all.sort_by(f64::total_cmp);
        ViewAngleSet::new(all)
    }
}

impl Serialize for ViewAngleSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.degrees().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ViewAngleSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let deg = Vec::<f64>::deserialize(d)?;
        ViewAngleSet::from_degrees(&deg).map_err(serde::de::Error::custom)
    }
}

/// View angles following the clinical convention: AP (0°) for a single
/// view, AP plus lateral (0°, 90°) for two, even spacing over the full
/// circle from 0° otherwise. `Generated` sets are evenly spaced from 0°
/// ([`GENERATED_VIEWS`] is the standard target count).
pub fn make_view_angles(n: usize, mode: ViewMode) -> Result<ViewAngleSet> {
    if n == 0 {
        return Err(Error::Angles("view count must be >= 1".into()));
    }
    let angles = match (mode, n) {
        (ViewMode::Input, 1) => vec![0.0],
        (ViewMode::Input, 2) => vec![0.0, std::f64::consts::FRAC_PI_2],
        (ViewMode::Input, n) => evenly_spaced(n),
        (ViewMode::Generated, n) => evenly_spaced(n),
    };
    ViewAngleSet::new(angles)
}

fn evenly_spaced(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}
