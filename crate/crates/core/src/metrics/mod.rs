//! Detection metrics for countermeasures in tandem with an ASV system.
//!
//! Score convention: higher scores are more bona-fide-like (or more
//! target-like for ASV). At threshold `s` a trial is rejected when its score is
//! strictly below `s`.

mod det;
mod tandem;
mod tdcf;

pub use det::{det_curve, eer, DetCurve, Eer};
pub use tandem::{
    evaluate_tandem, AttackResult, PooledBeta, TandemEvaluation, TandemOptions, HIGH_PENALTY_BETA,
    POOLED_LABEL,
};
pub use tdcf::{
    asv_error_rates, asv_operating_point, beta, min_tdcf, min_tdcf_normalized, AsvErrorRates,
    CostModel, Normalization, TdcfResult,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("degenerate class: no {0} scores")]
    DegenerateClass(&'static str),
    #[error("non-finite {0} score")]
    NonFinite(&'static str),
    #[error("invalid cost model: {0}")]
    InvalidCostModel(String),
    #[error("attack-free condition: β undefined (ASV never accepts the spoofs)")]
    BetaUndefined,
    #[error("invalid tandem configuration: C1 = {0} ≤ 0")]
    InvalidTandem(f64),
    #[error("β must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("invalid threshold {0}")]
    InvalidThreshold(f64),
    #[error("no ASV spoof scores for attack '{0}'")]
    MissingAsvAttack(String),
    #[error("attack '{attack}': {source}")]
    Attack {
        attack: String,
        #[source]
        source: Box<MetricsError>,
    },
}

impl MetricsError {
    fn for_attack(self, attack: &str) -> Self {
        MetricsError::Attack {
            attack: attack.to_string(),
            source: Box::new(self),
        }
    }
}

/// Serializes `f64` values that may be infinite (threshold sentinels) as the
/// strings `"inf"` / `"-inf"`.
pub mod extended_f64 {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
        if value.is_finite() {
            s.serialize_f64(*value)
        } else if *value > 0.0 {
            s.serialize_str("inf")
        } else if *value < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(de::Error::custom(format!("bad number '{other}'"))),
            },
        }
    }

    /// Plain-text rendering used by the TSV/CSV writers.
    pub fn display(value: f64) -> String {
        if value.is_finite() {
            format!("{value}")
        } else if value > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    }
}

fn check_scores(scores: &[f64], what: &'static str) -> Result<(), MetricsError> {
    if scores.is_empty() {
        return Err(MetricsError::DegenerateClass(what));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(MetricsError::NonFinite(what));
    }
    Ok(())
}
