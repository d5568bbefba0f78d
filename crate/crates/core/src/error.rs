use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the reconstruction toolkit.
///
/// Variants fall into three families that the CLI maps onto exit codes:
/// usage (1), data/format (2) and numeric/geometry (3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("point at or behind the source plane (denominator {denominator:.6} mm)")]
    BehindSource { denominator: f64 },

    #[error("invalid view angles: {0}")]
    Angles(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value at element {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("{path}: bad magic {found:?}, expected \"GITF\"")]
    BadMagic { path: PathBuf, found: [u8; 4] },

    #[error("{path}: unsupported GTF version {found} (expected 1)")]
    Version { path: PathBuf, found: u32 },

    #[error("{path}: unsupported dtype code {found} (expected 1 = float32)")]
    Dtype { path: PathBuf, found: u32 },

    #[error("{path}: unsupported rank {found} (expected 2..=4)")]
    Rank { path: PathBuf, found: u32 },

    #[error("{path}: truncated file ({actual} bytes, expected {expected})")]
    Truncated {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("{path}: dimensions {dims:?} overflow the addressable size")]
    DimOverflow { path: PathBuf, dims: Vec<u64> },

    #[error("{path}: trailing bytes ({actual} bytes, expected {expected})")]
    TrailingBytes {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("data error: {0}")]
    Data(String),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    /// True for errors that stem from numeric or geometric validation rather
    /// than from malformed files.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Geometry(_)
                | Error::BehindSource { .. }
                | Error::Angles(_)
                | Error::Shape(_)
                | Error::NonFinite { .. }
                | Error::Param(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
