use serde::{Deserialize, Serialize};

use super::det::{det_curve, eer};
use super::{check_scores, extended_f64, MetricsError};

/// Priors and detection costs of the tandem system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostModel {
    pub pi_tar: f64,
    pub pi_non: f64,
    pub pi_spoof: f64,
    pub c_miss_cm: f64,
    pub c_fa_cm: f64,
    pub c_miss_asv: f64,
    pub c_fa_asv: f64,
}

impl CostModel {
    /// The ASVspoof 2019 challenge defaults (evaluation-plan values, not
    /// restated in the challenge summary).
    pub const CHALLENGE_DEFAULTS: CostModel = CostModel {
        pi_tar: 0.9405,
        pi_non: 0.0095,
        pi_spoof: 0.05,
        c_miss_cm: 1.0,
        c_fa_cm: 10.0,
        c_miss_asv: 1.0,
        c_fa_asv: 10.0,
    };

    pub fn validate(&self) -> Result<(), MetricsError> {
        let priors = [self.pi_tar, self.pi_non, self.pi_spoof];
        let costs = [self.c_miss_cm, self.c_fa_cm, self.c_miss_asv, self.c_fa_asv];
        if priors.iter().chain(&costs).any(|v| !v.is_finite()) {
            return Err(MetricsError::InvalidCostModel("non-finite parameter".into()));
        }
        if priors.iter().any(|&p| p < 0.0) {
            return Err(MetricsError::InvalidCostModel("negative prior".into()));
        }
        let sum: f64 = priors.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(MetricsError::InvalidCostModel(format!(
                "priors sum to {sum}, expected 1"
            )));
        }
        if costs.iter().any(|&c| c < 0.0) {
            return Err(MetricsError::InvalidCostModel("negative cost".into()));
        }
        if costs.iter().all(|&c| c == 0.0) {
            return Err(MetricsError::InvalidCostModel("all costs are zero".into()));
        }
        Ok(())
    }
}

impl Default for CostModel {
    fn default() -> Self {
        Self::CHALLENGE_DEFAULTS
    }
}

/// ASV error rates at one shared threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsvErrorRates {
    pub threshold: f64,
    pub p_miss_asv: f64,
    pub p_fa_asv: f64,
    pub p_miss_spoof_asv: f64,
}

/// ASV threshold at the EER point of target vs nontarget scores.
pub fn asv_operating_point(target: &[f64], nontarget: &[f64]) -> Result<f64, MetricsError> {
    check_scores(target, "target")?;
    check_scores(nontarget, "nontarget")?;
    Ok(eer(&det_curve(target, nontarget)?).threshold)
}

pub fn asv_error_rates(
    threshold: f64,
    target: &[f64],
    nontarget: &[f64],
    spoof: &[f64],
) -> Result<AsvErrorRates, MetricsError> {
    if !threshold.is_finite() {
        return Err(MetricsError::InvalidThreshold(threshold));
    }
    check_scores(target, "target")?;
    check_scores(nontarget, "nontarget")?;
    check_scores(spoof, "spoof")?;
    let below = |xs: &[f64]| xs.iter().filter(|&&s| s < threshold).count() as f64 / xs.len() as f64;
    let at_or_above =
        |xs: &[f64]| xs.iter().filter(|&&s| s >= threshold).count() as f64 / xs.len() as f64;
    Ok(AsvErrorRates {
        threshold,
        p_miss_asv: below(target),
        p_fa_asv: at_or_above(nontarget),
        p_miss_spoof_asv: below(spoof),
    })
}

/// Relative weight of CM misses against CM false alarms.
///
/// `β = C1 / C2` with
/// `C1 = π_tar (C_miss_cm − C_miss_asv P_miss_asv) − π_non C_fa_asv P_fa_asv` and
/// `C2 = C_fa_cm π_spoof (1 − P_miss_spoof_asv)`.
pub fn beta(cost: &CostModel, rates: &AsvErrorRates) -> Result<f64, MetricsError> {
    cost.validate()?;
    let (c1, c2) = tandem_coefficients(cost, rates);
    if c2 <= 0.0 {
        return Err(MetricsError::BetaUndefined);
    }
    if c1 <= 0.0 {
        return Err(MetricsError::InvalidTandem(c1));
    }
    Ok(c1 / c2)
}

fn tandem_coefficients(cost: &CostModel, rates: &AsvErrorRates) -> (f64, f64) {
    let c1 = cost.pi_tar * (cost.c_miss_cm - cost.c_miss_asv * rates.p_miss_asv)
        - cost.pi_non * cost.c_fa_asv * rates.p_fa_asv;
    let c2 = cost.c_fa_cm * cost.pi_spoof * (1.0 - rates.p_miss_spoof_asv);
    (c1, c2)
}

/// How the CM-dependent cost is normalized.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `β P_miss + P_fa`, i.e. the cost divided by `C2`.
    #[default]
    FalseAlarmWeight,
    /// `(β P_miss + P_fa) / min(β, 1)`, i.e. the cost divided by `min(C1, C2)`,
    /// the cost of the better of the two trivial CMs.
    TrivialSystem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdcfResult {
    pub attack_label: String,
    pub beta: f64,
    pub min_tdcf: f64,
    #[serde(with = "extended_f64")]
    pub argmin_threshold: f64,
}

/// Minimum of `β P_miss(s) + P_fa(s)` over every empirical threshold.
///
/// Ties resolve to the lowest threshold. The attack label is left empty for
/// the caller to fill in.
pub fn min_tdcf(bonafide: &[f64], spoof: &[f64], beta: f64) -> Result<TdcfResult, MetricsError> {
    min_tdcf_normalized(bonafide, spoof, beta, Normalization::FalseAlarmWeight)
}

pub fn min_tdcf_normalized(
    bonafide: &[f64],
    spoof: &[f64],
    beta: f64,
    normalization: Normalization,
) -> Result<TdcfResult, MetricsError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(MetricsError::InvalidBeta(beta));
    }
    let curve = det_curve(bonafide, spoof)?;
    let mut best = (f64::INFINITY, f64::NAN);
    for i in 0..curve.len() {
        let cost = beta * curve.p_miss[i] + curve.p_fa[i];
        if cost < best.0 {
            best = (cost, curve.thresholds[i]);
        }
    }
    let scale = match normalization {
        Normalization::FalseAlarmWeight => 1.0,
        Normalization::TrivialSystem => beta.min(1.0),
    };
    Ok(TdcfResult {
        attack_label: String::new(),
        beta,
        min_tdcf: best.0 / scale,
        argmin_threshold: best.1,
    })
}
