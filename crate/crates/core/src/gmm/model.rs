use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GmmError;
use crate::features::FeatureMatrix;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Frames per parallel work unit. Partial sums are combined in block order.
pub(crate) const BLOCK: usize = 1024;

/// Diagonal-covariance Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct GmmModel {
    dims: usize,
    weights: Vec<f64>,
    /// Row-major `n_components × dims`.
    means: Vec<f64>,
    variances: Vec<f64>,
    /// Per-dimension lower bound on every variance.
    variance_floor: Vec<f64>,
    // Cached per component: ln w_k − ½ (d ln 2π + Σ ln σ²).
    log_norm: Vec<f64>,
    inv_var: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    n_components: usize,
    dims: usize,
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
    variance_floor: Vec<f64>,
}

impl TryFrom<RawModel> for GmmModel {
    type Error = GmmError;

    fn try_from(raw: RawModel) -> Result<Self, GmmError> {
        if raw.weights.len() != raw.n_components || raw.means.len() != raw.n_components {
            return Err(GmmError::InvalidModel("component count mismatch".into()));
        }
        if raw.variance_floor.len() != raw.dims {
            return Err(GmmError::InvalidModel("floor length mismatch".into()));
        }
        GmmModel::new(raw.weights, raw.means, raw.variances, raw.variance_floor)
    }
}

impl From<GmmModel> for RawModel {
    fn from(m: GmmModel) -> Self {
        RawModel {
            n_components: m.n_components(),
            dims: m.dims,
            means: m.means.chunks(m.dims).map(<[f64]>::to_vec).collect(),
            variances: m.variances.chunks(m.dims).map(<[f64]>::to_vec).collect(),
            weights: m.weights,
            variance_floor: m.variance_floor,
        }
    }
}

impl GmmModel {
    /// Validates and builds a model. Weights must lie on the simplex within
    /// 1e-12 and every variance must be at least its dimension's floor.
    pub fn new(
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        variances: Vec<Vec<f64>>,
        variance_floor: Vec<f64>,
    ) -> Result<Self, GmmError> {
        let dims = variance_floor.len();
        let k = weights.len();
        if k == 0 || dims == 0 {
            return Err(GmmError::InvalidModel("empty model".into()));
        }
        if means.len() != k
            || variances.len() != k
            || means.iter().chain(&variances).any(|r| r.len() != dims)
        {
            return Err(GmmError::InvalidModel("ragged parameter arrays".into()));
        }
        Self::from_flat(dims, weights, means.concat(), variances.concat(), variance_floor)
    }

    pub(crate) fn from_flat(
        dims: usize,
        weights: Vec<f64>,
        means: Vec<f64>,
        variances: Vec<f64>,
        variance_floor: Vec<f64>,
    ) -> Result<Self, GmmError> {
        let all = weights.iter().chain(&means).chain(&variances).chain(&variance_floor);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(GmmError::InvalidModel("non-finite parameter".into()));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(GmmError::InvalidModel(format!("weights sum to {total}")));
        }
        if variance_floor.iter().any(|&f| f <= 0.0) {
            return Err(GmmError::InvalidModel("variance floor must be positive".into()));
        }
        for row in variances.chunks(dims) {
            if row.iter().zip(&variance_floor).any(|(v, f)| v < f) {
                return Err(GmmError::InvalidModel("variance below floor".into()));
            }
        }
        let inv_var: Vec<f64> = variances.iter().map(|v| 1.0 / v).collect();
        let log_norm = weights
            .iter()
            .zip(variances.chunks(dims))
            .map(|(w, var)| {
                let log_det: f64 = var.iter().map(|v| v.ln()).sum();
                w.ln() - 0.5 * (dims as f64 * LN_2PI + log_det)
            })
            .collect();
        Ok(GmmModel {
            dims,
            weights,
            means,
            variances,
            variance_floor,
            log_norm,
            inv_var,
        })
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self, k: usize) -> &[f64] {
        &self.means[k * self.dims..(k + 1) * self.dims]
    }

    pub fn variance(&self, k: usize) -> &[f64] {
        &self.variances[k * self.dims..(k + 1) * self.dims]
    }

    pub fn variance_floor(&self) -> &[f64] {
        &self.variance_floor
    }

    /// `ln w_k + ln N(x; μ_k, σ²_k)` for every component, written into `out`.
    pub(crate) fn component_log_densities(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dims;
        for (k, o) in out.iter_mut().enumerate() {
            let mu = &self.means[k * d..(k + 1) * d];
            let iv = &self.inv_var[k * d..(k + 1) * d];
            let mut q = 0.0;
            for j in 0..d {
                let z = x[j] - mu[j];
                q += z * z * iv[j];
            }
            *o = self.log_norm[k] - 0.5 * q;
        }
    }

    /// Log mixture density of one frame.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let mut buf = vec![0.0; self.n_components()];
        self.component_log_densities(x, &mut buf);
        log_sum_exp(&buf)
    }

    fn check_dims(&self, frames: &FeatureMatrix) -> Result<(), GmmError> {
        if frames.dims() != self.dims {
            return Err(GmmError::DimMismatch {
                expected: self.dims,
                got: frames.dims(),
            });
        }
        Ok(())
    }

    /// Total log-likelihood of a set of frames, summed in block order.
    pub(crate) fn total_log_likelihood(&self, frames: &FeatureMatrix) -> f64 {
        let d = self.dims;
        let partial: Vec<f64> = frames
            .values()
            .par_chunks(BLOCK * d)
            .map(|block| {
                let mut buf = vec![0.0; self.n_components()];
                block
                    .chunks_exact(d)
                    .map(|x| {
                        self.component_log_densities(x, &mut buf);
                        log_sum_exp(&buf)
                    })
                    .sum::<f64>()
            })
            .collect();
        partial.iter().sum()
    }

    /// Mean per-frame log-likelihood in nats.
    pub fn avg_log_likelihood(&self, frames: &FeatureMatrix) -> Result<f64, GmmError> {
        self.check_dims(frames)?;
        if frames.frames() == 0 {
            return Err(GmmError::InvalidConfig("no frames to score".into()));
        }
        Ok(self.total_log_likelihood(frames) / frames.frames() as f64)
    }
}

/// Bona fide minus spoof average log-likelihood; higher means bona fide.
pub fn llr_score(
    bonafide: &GmmModel,
    spoof: &GmmModel,
    frames: &FeatureMatrix,
) -> Result<f64, GmmError> {
    Ok(bonafide.avg_log_likelihood(frames)? - spoof.avg_log_likelihood(frames)?)
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
