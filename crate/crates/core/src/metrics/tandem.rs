use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::det::{det_curve, eer, Eer};
use super::tdcf::{
    asv_error_rates, asv_operating_point, beta, min_tdcf_normalized, AsvErrorRates, CostModel,
    Normalization, TdcfResult,
};
use super::MetricsError;
use crate::protocol::{ScoreKey, ScoreSet};

/// Label used for metrics over all attacks jointly.
pub const POOLED_LABEL: &str = "pooled";

/// Attacks with β at or above this value are flagged as high-penalty: a CM
/// miss on bona fide speech costs at least ten times a missed spoof.
pub const HIGH_PENALTY_BETA: f64 = 10.0;

/// How the pooled β is obtained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PooledBeta {
    /// From the ASV spoof miss rate over all spoof trials.
    #[default]
    PooledRates,
    /// Arithmetic mean of the per-attack β values.
    MeanOfAttacks,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TandemOptions {
    pub normalization: Normalization,
    pub pooled_beta: PooledBeta,
    /// Fixed ASV threshold (e.g. derived on development data). When absent the
    /// EER threshold of the supplied target/nontarget scores is used.
    pub asv_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub tdcf: TdcfResult,
    pub cm_eer: Eer,
    pub asv_rates: AsvErrorRates,
    /// ASV EER of target trials against this attack's spoof trials.
    pub asv_eer_under_attack: f64,
    pub n_spoof_cm: usize,
    pub high_penalty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TandemEvaluation {
    pub asv_threshold: f64,
    /// ASV EER of target against nontarget trials (no spoofing).
    pub asv_eer: f64,
    pub n_bonafide_cm: usize,
    pub pooled: AttackResult,
    /// Sorted by attack label.
    pub per_attack: Vec<AttackResult>,
}

impl TandemEvaluation {
    pub fn attack(&self, label: &str) -> Option<&AttackResult> {
        if label == POOLED_LABEL {
            return Some(&self.pooled);
        }
        self.per_attack.iter().find(|r| r.tdcf.attack_label == label)
    }
}

/// Pooled and per-attack minimum t-DCF and EERs.
///
/// Bona fide CM scores are shared by every decomposition; each attack uses its
/// own spoof scores for both β (through the ASV spoof miss rate) and the CM
/// trade-off.
pub fn evaluate_tandem(
    cm: &ScoreSet,
    asv: &ScoreSet,
    cost: &CostModel,
    options: &TandemOptions,
) -> Result<TandemEvaluation, MetricsError> {
    cost.validate()?;
    let cm_bona = cm.scores_with_key(ScoreKey::Bonafide);
    let cm_spoof = cm.scores_with_key(ScoreKey::Spoof);
    if cm_bona.is_empty() {
        return Err(MetricsError::DegenerateClass("CM bonafide"));
    }
    if cm_spoof.is_empty() {
        return Err(MetricsError::DegenerateClass("CM spoof"));
    }
    let target = asv.scores_with_key(ScoreKey::Target);
    let nontarget = asv.scores_with_key(ScoreKey::Nontarget);
    let asv_spoof = asv.scores_with_key(ScoreKey::Spoof);

    let asv_threshold = match options.asv_threshold {
        Some(t) => t,
        None => asv_operating_point(&target, &nontarget)?,
    };
    let asv_eer = eer(&det_curve(&target, &nontarget)?).rate;

    let attacks = cm.attack_labels();
    let per_attack = attacks
        .par_iter()
        .map(|attack| {
            let spoof_asv = asv.spoof_scores_for(attack);
            if spoof_asv.is_empty() {
                return Err(MetricsError::MissingAsvAttack(attack.clone()));
            }
            let spoof_cm = cm.spoof_scores_for(attack);
            let rates = asv_error_rates(asv_threshold, &target, &nontarget, &spoof_asv)
                .map_err(|e| e.for_attack(attack))?;
            let b = beta(cost, &rates).map_err(|e| e.for_attack(attack))?;
            attack_result(
                attack,
                &cm_bona,
                &spoof_cm,
                &target,
                &spoof_asv,
                rates,
                b,
                options.normalization,
            )
            .map_err(|e| e.for_attack(attack))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let pooled_rates = asv_error_rates(asv_threshold, &target, &nontarget, &asv_spoof)
        .map_err(|e| e.for_attack(POOLED_LABEL))?;
    let pooled_beta = match options.pooled_beta {
        PooledBeta::PooledRates => {
            beta(cost, &pooled_rates).map_err(|e| e.for_attack(POOLED_LABEL))?
        }
        PooledBeta::MeanOfAttacks => {
            per_attack.iter().map(|r| r.tdcf.beta).sum::<f64>() / per_attack.len() as f64
        }
    };
    let pooled = attack_result(
        POOLED_LABEL,
        &cm_bona,
        &cm_spoof,
        &target,
        &asv_spoof,
        pooled_rates,
        pooled_beta,
        options.normalization,
    )
    .map_err(|e| e.for_attack(POOLED_LABEL))?;

    Ok(TandemEvaluation {
        asv_threshold,
        asv_eer,
        n_bonafide_cm: cm_bona.len(),
        pooled,
        per_attack,
    })
}

#[allow(clippy::too_many_arguments)]
fn attack_result(
    label: &str,
    cm_bona: &[f64],
    cm_spoof: &[f64],
    asv_target: &[f64],
    asv_spoof: &[f64],
    rates: AsvErrorRates,
    beta: f64,
    normalization: Normalization,
) -> Result<AttackResult, MetricsError> {
    let mut tdcf = min_tdcf_normalized(cm_bona, cm_spoof, beta, normalization)?;
    tdcf.attack_label = label.to_string();
    Ok(AttackResult {
        tdcf,
        cm_eer: eer(&det_curve(cm_bona, cm_spoof)?),
        asv_rates: rates,
        asv_eer_under_attack: eer(&det_curve(asv_target, asv_spoof)?).rate,
        n_spoof_cm: cm_spoof.len(),
        high_penalty: beta >= HIGH_PENALTY_BETA,
    })
}
