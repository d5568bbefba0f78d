//! Cone-beam CT geometry, projection and sparse-view reconstruction.
//!
//! The crate is organised around a circular cone-beam geometry
//! ([`geometry`]) and a matched pair of operators: a voxel-driven
//! back-projector that builds geometry-preserving images ([`backprojector`])
//! and its exact transpose ([`projector::splat_project`]). A ray-marching
//! DRR generator and an exact Siddon tracer provide realistic projections
//! and an accuracy oracle. On top sit procedural phantoms, the dataset and
//! GTF tensor interchange, SART/TV reconstruction, image-quality metrics and
//! the `conebeam` command-line tool.

pub mod backprojector;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod phantom;
pub mod projector;
pub mod recon;
pub mod rng;
pub mod volume;

pub use backprojector::{backproject, make_gpi_pair, GpiPair};
pub use error::{Error, Result};
pub use geometry::{
    make_view_angles, ConeBeamGeometry, DetectorSpec, ViewAngleSet, ViewMode, VolumeGrid,
};
pub use projector::{forward_project, siddon_line_integral, splat_project};
pub use volume::{Projection2D, ProjectionSet, Volume3D};
