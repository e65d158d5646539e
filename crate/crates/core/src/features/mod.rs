//! Cepstral front-ends for the GMM countermeasures.
//!
//! Both pipelines apply [`LOG_FLOOR`] before taking logarithms, so every output
//! is finite for any finite input.

mod audio;
mod container;
mod cqcc;
mod cqt;
mod deltas;
mod dct;
mod lfcc;
mod spline;

pub use audio::{encode_wav, read_wav, write_wav, AudioBuffer};
pub use container::{read_features, write_features, FEATURE_MAGIC, FEATURE_VERSION};
pub use cqcc::{cqcc, cqcc_static, CqccConfig};
pub use cqt::{cqt, cqt_geometry, CqtGeometry, CqtMatrix};
pub use dct::{dct_ii_orthonormal, DctMatrix};
pub use deltas::append_deltas;
pub use lfcc::{lfcc, lfcc_log_energies, linear_filterbank, LfccConfig};
pub use spline::NaturalCubicSpline;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Floor applied to powers and filterbank energies before the logarithm.
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("input too short: {got} samples, need at least {needed}")]
    InputTooShort { needed: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid audio: {0}")]
    InvalidAudio(String),
    #[error("malformed feature file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Wav(#[from] hound::Error),
}

/// Row-major `frames × dims` matrix of finite values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    frames: usize,
    dims: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(frames: usize, dims: usize, values: Vec<f64>) -> Result<Self, FeatureError> {
        if values.len() != frames * dims {
            return Err(FeatureError::Format(format!(
                "{} values for a {frames}x{dims} matrix",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FeatureError::Format("non-finite feature value".into()));
        }
        Ok(FeatureMatrix {
            frames,
            dims,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, FeatureError> {
        let dims = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dims) {
            return Err(FeatureError::Format("ragged rows".into()));
        }
        Self::new(rows.len(), dims, rows.concat())
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.values[frame * self.dims..(frame + 1) * self.dims]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dims.max(1)).take(self.frames)
    }

    pub fn get(&self, frame: usize, dim: usize) -> f64 {
        self.values[frame * self.dims + dim]
    }

    /// Stacks matrices with equal dims along the frame axis.
    pub fn concat(parts: &[&FeatureMatrix]) -> Result<Self, FeatureError> {
        let dims = parts.first().map_or(0, |m| m.dims);
        if parts.iter().any(|m| m.dims != dims) {
            return Err(FeatureError::Format("dimension mismatch".into()));
        }
        let values: Vec<f64> = parts.iter().flat_map(|m| m.values.iter().copied()).collect();
        let frames = parts.iter().map(|m| m.frames).sum();
        Ok(FeatureMatrix {
            frames,
            dims,
            values,
        })
    }

    pub fn to_csv(&self) -> String {
        let header: Vec<String> = (0..self.dims).map(|d| format!("c{d}")).collect();
        let mut out = header.join(",");
        out.push('\n');
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}
