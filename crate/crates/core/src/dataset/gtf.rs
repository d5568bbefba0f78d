//! GTF tensor files.
//!
//! ```text
//! offset  size        field
//! 0       4           magic "GITF"
//! 4       4           version, u32 LE = 1
//! 8       4           dtype,   u32 LE (1 = float32)
//! 12      4           rank,    u32 LE (2..=4)
//! 16      48          reserved, zero
//! 64      8 * rank    dims, u64 LE, slowest axis first
//! ...     4 * prod    payload, f32 LE, row-major (last dim fastest)
//! ```
//!
//! Volumes are stored `(z, y, x)`, projection sets `(view, v, u)`. Physical
//! metadata travels in an optional JSON sidecar next to the file
//! (`<name>.gtf.json`).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::normalize::ScaleRecord;
use crate::error::{Error, Result};
use crate::geometry::{DetectorSpec, ViewAngleSet, VolumeGrid};
use crate::volume::{ProjectionSet, Volume3D};

pub const MAGIC: [u8; 4] = *b"GITF";
pub const VERSION: u32 = 1;
pub const DTYPE_F32: u32 = 1;
pub const HEADER_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub dims: Vec<usize>,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        if !(2..=4).contains(&dims.len()) {
            return Err(Error::Shape(format!(
                "tensor rank {} outside 2..=4",
                dims.len()
            )));
        }
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Shape(format!("dims {dims:?} overflow")))?;
        if n != data.len() {
            return Err(Error::Shape(format!(
                "dims {dims:?} need {n} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor { dims, data })
    }

    pub fn from_volume(v: &Volume3D) -> Self {
        let [nx, ny, nz] = v.grid.dims;
        Tensor {
            dims: vec![nz, ny, nx],
            data: v.data.clone(),
        }
    }

    pub fn from_projections(p: &ProjectionSet) -> Self {
        let d = p.detector();
        Tensor {
            dims: vec![p.len(), d.nv, d.nu],
            data: p.stack(),
        }
    }

    pub fn into_volume(self, spacing: [f64; 3]) -> Result<Volume3D> {
        if self.dims.len() != 3 {
            return Err(Error::Shape(format!(
                "expected a rank-3 (z, y, x) volume, got dims {:?}",
                self.dims
            )));
        }
        let grid = VolumeGrid {
            dims: [self.dims[2], self.dims[1], self.dims[0]],
            spacing,
        };
        Volume3D::from_data(grid, self.data)
    }

    pub fn into_projections(self, pitch: [f64; 2], angles: &ViewAngleSet) -> Result<ProjectionSet> {
        if self.dims.len() != 3 || self.dims[0] != angles.len() {
            return Err(Error::Shape(format!(
                "expected a (view, v, u) stack with {} views, got dims {:?}",
                angles.len(),
                self.dims
            )));
        }
        let det = DetectorSpec {
            nu: self.dims[2],
            nv: self.dims[1],
            pitch_u: pitch[0],
            pitch_v: pitch[1],
        };
        ProjectionSet::from_stack(det, angles, self.data)
    }
}

pub fn encode_gtf(t: &Tensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * t.dims.len() + 4 * t.data.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&DTYPE_F32.to_le_bytes());
    out.extend_from_slice(&(t.dims.len() as u32).to_le_bytes());
    out.resize(HEADER_LEN, 0);
    for &d in &t.dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for &x in &t.data {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

fn u32_at(bytes: &[u8], off: usize) -> u32 {
    u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap())
}

pub fn decode_gtf(bytes: &[u8], path: &Path) -> Result<Tensor> {
    let path_buf = || path.to_path_buf();
    let truncated = |expected: u64| Error::Truncated {
        path: path_buf(),
        expected,
        actual: bytes.len() as u64,
    };
    if bytes.len() < 4 {
        return Err(truncated(HEADER_LEN as u64));
    }
    if bytes[..4] != MAGIC {
        return Err(Error::BadMagic {
            path: path_buf(),
            found: bytes[..4].try_into().unwrap(),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(truncated(HEADER_LEN as u64));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(Error::Version {
            path: path_buf(),
            found: version,
        });
    }
    let dtype = u32_at(bytes, 8);
    if dtype != DTYPE_F32 {
        return Err(Error::Dtype {
            path: path_buf(),
            found: dtype,
        });
    }
    let rank = u32_at(bytes, 12);
    if !(2..=4).contains(&rank) {
        return Err(Error::Rank {
            path: path_buf(),
            found: rank,
        });
    }
    let rank = rank as usize;
    let dims_end = HEADER_LEN + 8 * rank;
    if bytes.len() < dims_end {
        return Err(truncated(dims_end as u64));
    }
    let dims64: Vec<u64> = (0..rank)
        .map(|i| {
            let off = HEADER_LEN + 8 * i;
            u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap())
        })
        .collect();
    let overflow = || Error::DimOverflow {
        path: path_buf(),
        dims: dims64.clone(),
    };
    let count = dims64
        .iter()
        .try_fold(1u64, |acc, &d| acc.checked_mul(d))
        .ok_or_else(overflow)?;
    let payload = count.checked_mul(4).ok_or_else(overflow)?;
    let expected = (dims_end as u64)
        .checked_add(payload)
        .ok_or_else(overflow)?;
    let count = usize::try_from(count).map_err(|_| overflow())?;
    let dims: Vec<usize> = dims64
        .iter()
        .map(|&d| usize::try_from(d).map_err(|_| overflow()))
        .collect::<Result<_>>()?;
    let actual = bytes.len() as u64;
    if actual < expected {
        return Err(truncated(expected));
    }
    if actual > expected {
        return Err(Error::TrailingBytes {
            path: path_buf(),
            expected,
            actual,
        });
    }
    let data = bytes[dims_end..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect::<Vec<_>>();
    debug_assert_eq!(data.len(), count);
    Ok(Tensor { dims, data })
}

pub fn write_gtf(path: &Path, t: &Tensor) -> Result<()> {
    if !(2..=4).contains(&t.dims.len()) {
        return Err(Error::Shape(format!(
            "tensor rank {} outside 2..=4",
            t.dims.len()
        )));
    }
    let bytes = encode_gtf(t);
    let mut f =
        fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    f.write_all(&bytes)
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn read_gtf(path: &Path) -> Result<Tensor> {
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    decode_gtf(&bytes, path)
}

/// Physical metadata stored next to a GTF file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TensorMeta {
    Volume {
        spacing_mm: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<ScaleRecord>,
    },
    Projections {
        angles_deg: ViewAngleSet,
        pitch_mm: [f64; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<ScaleRecord>,
    },
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

pub fn write_meta(path: &Path, meta: &TensorMeta) -> Result<()> {
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(meta).expect("metadata serializes");
    fs::write(&side, text + "\n").map_err(|e| Error::io(format!("writing {}", side.display()), e))
}

pub fn read_meta(path: &Path) -> Result<TensorMeta> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side)
        .map_err(|e| Error::io(format!("reading {}", side.display()), e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(format!("parsing {}", side.display()), e))
}

pub fn write_volume(path: &Path, v: &Volume3D, scale: Option<ScaleRecord>) -> Result<()> {
    write_gtf(path, &Tensor::from_volume(v))?;
    write_meta(
        path,
        &TensorMeta::Volume {
            spacing_mm: v.grid.spacing,
            scale,
        },
    )
}

pub fn write_projections(path: &Path, p: &ProjectionSet, scale: Option<ScaleRecord>) -> Result<()> {
    write_gtf(path, &Tensor::from_projections(p))?;
    let d = p.detector();
    write_meta(
        path,
        &TensorMeta::Projections {
            angles_deg: p.angles().clone(),
            pitch_mm: [d.pitch_u, d.pitch_v],
            scale,
        },
    )
}

/// Reads a volume; spacing comes from the sidecar when present, otherwise
/// from `fallback_spacing`.
pub fn read_volume(
    path: &Path,
    fallback_spacing: Option<[f64; 3]>,
) -> Result<(Volume3D, Option<ScaleRecord>)> {
    let t = read_gtf(path)?;
    let (spacing, scale) = if sidecar_path(path).exists() {
        match read_meta(path)? {
            TensorMeta::Volume { spacing_mm, scale } => (spacing_mm, scale),
            TensorMeta::Projections { .. } => {
                return Err(Error::Data(format!(
                    "{} holds projections, expected a volume",
                    path.display()
                )))
            }
        }
    } else {
        let s = fallback_spacing.ok_or_else(|| {
            Error::Data(format!(
                "{} has no metadata sidecar and no spacing was given",
                sidecar_path(path).display()
            ))
        })?;
        (s, None)
    };
    Ok((t.into_volume(spacing)?, scale))
}

pub fn read_projections(path: &Path) -> Result<(ProjectionSet, Option<ScaleRecord>)> {
    let t = read_gtf(path)?;
    match read_meta(path)? {
        TensorMeta::Projections {
            angles_deg,
            pitch_mm,
            scale,
        } => Ok((t.into_projections(pitch_mm, &angles_deg)?, scale)),
        TensorMeta::Volume { .. } => Err(Error::Data(format!(
            "{} holds a volume, expected projections",
            path.display()
        ))),
    }
}
