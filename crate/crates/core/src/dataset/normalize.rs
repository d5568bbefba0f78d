use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Original value range of a normalised tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleRecord {
    pub lo: f64,
    pub hi: f64,
    pub degenerate: bool,
}

impl ScaleRecord {
    #[inline]
    pub fn forward(&self, x: f64) -> f64 {
        if self.degenerate {
            0.0
        } else {
            2.0 * (x - self.lo) / (self.hi - self.lo) - 1.0
        }
    }

    #[inline]
    pub fn inverse(&self, y: f64) -> f64 {
        if self.degenerate {
            self.lo
        } else {
            self.lo + (y + 1.0) * 0.5 * (self.hi - self.lo)
        }
    }
}

fn scale_of(values: impl Iterator<Item = f64>) -> Result<ScaleRecord> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut any = false;
    for (index, v) in values.enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { index });
        }
        lo = lo.min(v);
        hi = hi.max(v);
        any = true;
    }
    if !any {
        return Err(Error::Shape("cannot normalise an empty tensor".into()));
    }
    Ok(ScaleRecord {
        lo,
        hi,
        degenerate: lo == hi,
    })
}

/// Min-max map onto `[-1, 1]`; a constant tensor maps to zeros.
pub fn normalize_f64(data: &[f64]) -> Result<(Vec<f64>, ScaleRecord)> {
    let rec = scale_of(data.iter().copied())?;
    Ok((
        data.iter()
            .map(|&x| rec.forward(x).clamp(-1.0, 1.0))
            .collect(),
        rec,
    ))
}

pub fn denormalize_f64(data: &[f64], rec: &ScaleRecord) -> Vec<f64> {
    data.iter().map(|&y| rec.inverse(y)).collect()
}

/// f32 storage variant of [`normalize_f64`]; the map itself runs in f64.
pub fn normalize(data: &[f32]) -> Result<(Vec<f32>, ScaleRecord)> {
    let rec = scale_of(data.iter().map(|&x| x as f64))?;
    Ok((
        data.iter()
            .map(|&x| rec.forward(x as f64).clamp(-1.0, 1.0) as f32)
            .collect(),
        rec,
    ))
}

pub fn denormalize(data: &[f32], rec: &ScaleRecord) -> Vec<f32> {
    data.iter().map(|&y| rec.inverse(y as f64) as f32).collect()
}
