//! Protocol and score file I/O.
//!
//! Protocol lines carry five whitespace-separated fields:
//!
//! ```text
//! SPEAKER_ID TRIAL_ID SYSTEM_ID ATTACK_LABEL KEY
//! ```
//!
//! and score lines carry four:
//!
//! ```text
//! TRIAL_ID ATTACK_LABEL KEY SCORE
//! ```
//!
//! Fields are separated by any run of ASCII spaces or tabs. Lines are split on
//! LF with an optional trailing CR. Empty lines and lines starting with `#`
//! are skipped. Line numbers in errors are 1-based physical line numbers.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Attack label reserved for genuine speech.
pub const BONAFIDE_LABEL: &str = "bonafide";

/// Placeholder for unused columns.
pub const PLACEHOLDER: &str = "-";

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: duplicate trial '{trial_id}'")]
    DuplicateTrial { line: usize, trial_id: String },
    #[error("line {line}: unknown key '{token}'")]
    UnknownKey { line: usize, token: String },
    #[error("line {line}: key '{key}' inconsistent with attack label '{attack}'")]
    KeyLabelMismatch {
        line: usize,
        key: String,
        attack: String,
    },
    #[error("line {line}: invalid score '{token}'")]
    InvalidScore { line: usize, token: String },
    #[error("line {line}: non-finite score '{token}'")]
    NonFiniteScore { line: usize, token: String },
    #[error("{total} protocol trial(s) missing from scores: {}", .listed.join(", "))]
    MissingTrials { listed: Vec<String>, total: usize },
    #[error("trial '{trial_id}': scores say {score_attack}/{score_key}, protocol says {protocol_attack}/{protocol_key}")]
    JoinMismatch {
        trial_id: String,
        score_attack: String,
        score_key: String,
        protocol_attack: String,
        protocol_key: String,
    },
}

/// Ground-truth class of a protocol trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialKey {
    Bonafide,
    Spoof,
}

impl TrialKey {
    pub fn as_str(self) -> &'static str {
        match self {
            TrialKey::Bonafide => "bonafide",
            TrialKey::Spoof => "spoof",
        }
    }
}

/// Data partition a trial belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    Train,
    Dev,
    Eval,
}

impl Subset {
    /// Infers the partition from the `_T_` / `_D_` / `_E_` infix used in
    /// trial identifiers such as `LA_E_1000147`.
    pub fn infer(trial_id: &str) -> Option<Subset> {
        let mut parts = trial_id.split('_');
        parts.next()?;
        match parts.next()? {
            "T" => Some(Subset::Train),
            "D" => Some(Subset::Dev),
            "E" => Some(Subset::Eval),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub speaker_id: String,
    pub trial_id: String,
    /// Third protocol column; `-` when unused. Physical-access protocols use
    /// it for the acoustic environment triple (e.g. `abc`).
    pub system_id: String,
    pub attack_label: String,
    pub key: TrialKey,
    /// `None` when the trial id does not follow the partition naming scheme.
    pub subset: Option<Subset>,
}

/// Key column of a score file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKey {
    Bonafide,
    Spoof,
    Target,
    Nontarget,
}

impl ScoreKey {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreKey::Bonafide => "bonafide",
            ScoreKey::Spoof => "spoof",
            ScoreKey::Target => "target",
            ScoreKey::Nontarget => "nontarget",
        }
    }

    fn parse(token: &str, kind: ScoreKind) -> Option<ScoreKey> {
        match (kind, token) {
            (ScoreKind::Cm, "bonafide") => Some(ScoreKey::Bonafide),
            (ScoreKind::Asv, "target") => Some(ScoreKey::Target),
            (ScoreKind::Asv, "nontarget") => Some(ScoreKey::Nontarget),
            (_, "spoof") => Some(ScoreKey::Spoof),
            _ => None,
        }
    }

    /// Whether this score key is compatible with a protocol key.
    fn matches(self, key: TrialKey) -> bool {
        match key {
            TrialKey::Spoof => self == ScoreKey::Spoof,
            TrialKey::Bonafide => self != ScoreKey::Spoof,
        }
    }
}

impl fmt::Display for ScoreKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether a score file comes from a countermeasure or from the ASV system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    Cm,
    Asv,
}

impl FromStr for ScoreKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cm" => Ok(ScoreKind::Cm),
            "asv" => Ok(ScoreKind::Asv),
            other => Err(format!("unknown score kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub trial_id: String,
    pub attack_label: String,
    pub key: ScoreKey,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub kind: ScoreKind,
    pub records: Vec<ScoreRecord>,
}

impl ScoreSet {
    pub fn new(kind: ScoreKind) -> Self {
        ScoreSet {
            kind,
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Scores carrying `key`, in file order.
    pub fn scores_with_key(&self, key: ScoreKey) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.key == key)
            .map(|r| r.score)
            .collect()
    }

    /// Spoof scores for one attack label, in file order.
    pub fn spoof_scores_for(&self, attack: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.key == ScoreKey::Spoof && r.attack_label == attack)
            .map(|r| r.score)
            .collect()
    }

    /// Sorted distinct attack labels of spoof records.
    pub fn attack_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self
            .records
            .iter()
            .filter(|r| r.key == ScoreKey::Spoof)
            .map(|r| r.attack_label.clone())
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        labels.sort();
        labels
    }

    /// Writes the set in score-file format.
    pub fn emit(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 32);
        for r in &self.records {
            out.push_str(&r.trial_id);
            out.push(' ');
            out.push_str(&r.attack_label);
            out.push(' ');
            out.push_str(r.key.as_str());
            out.push(' ');
            out.push_str(&format_score(r.score));
            out.push('\n');
        }
        out
    }
}

/// Formats a score in fixed decimal notation with six significant digits.
///
/// `-3.25` becomes `-3.25000`, `1234567.0` becomes `1234570`, `0.0` becomes
/// `0.00000`.
pub fn format_score(value: f64) -> String {
    if value == 0.0 {
        return "0.00000".to_string();
    }
    // Round to six significant digits through the exponential formatter, which
    // also yields the decimal exponent of the rounded value.
    let sci = format!("{value:.5e}");
    let (_, exp) = sci.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("exponent");
    let rounded: f64 = sci.parse().expect("round trip");
    let decimals = (5 - exp).max(0) as usize;
    format!("{rounded:.decimals$}")
}

/// Iterates over meaningful lines as `(line_number, fields)`.
fn fields(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.split('\n').enumerate().filter_map(|(idx, raw)| {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = line.trim_start_matches([' ', '\t']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            return None;
        }
        let parts: Vec<&str> = line
            .split([' ', '\t'])
            .filter(|field| !field.is_empty())
            .collect();
        if parts.is_empty() {
            None
        } else {
            Some((idx + 1, parts))
        }
    })
}

pub fn parse_protocol(text: &str) -> Result<Vec<TrialRecord>, ProtocolError> {
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (line, parts) in fields(text) {
        if parts.len() != 5 {
            return Err(ProtocolError::FieldCount {
                line,
                expected: 5,
                found: parts.len(),
            });
        }
        let key = match parts[4] {
            "bonafide" => TrialKey::Bonafide,
            "spoof" => TrialKey::Spoof,
            other => {
                return Err(ProtocolError::UnknownKey {
                    line,
                    token: other.to_string(),
                })
            }
        };
        let attack = parts[3];
        if (key == TrialKey::Bonafide) != (attack == BONAFIDE_LABEL) {
            return Err(ProtocolError::KeyLabelMismatch {
                line,
                key: parts[4].to_string(),
                attack: attack.to_string(),
            });
        }
        let trial_id = parts[1];
        if !seen.insert(trial_id) {
            return Err(ProtocolError::DuplicateTrial {
                line,
                trial_id: trial_id.to_string(),
            });
        }
        records.push(TrialRecord {
            speaker_id: parts[0].to_string(),
            trial_id: trial_id.to_string(),
            system_id: parts[2].to_string(),
            attack_label: attack.to_string(),
            key,
            subset: Subset::infer(trial_id),
        });
    }
    Ok(records)
}

/// Writes protocol records back in protocol-file format.
pub fn emit_protocol(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            r.speaker_id,
            r.trial_id,
            r.system_id,
            r.attack_label,
            r.key.as_str()
        ));
    }
    out
}

pub fn parse_scores(text: &str, kind: ScoreKind) -> Result<ScoreSet, ProtocolError> {
    let mut seen = HashSet::new();
    let mut set = ScoreSet::new(kind);
    for (line, parts) in fields(text) {
        if parts.len() != 4 {
            return Err(ProtocolError::FieldCount {
                line,
                expected: 4,
                found: parts.len(),
            });
        }
        let key = ScoreKey::parse(parts[2], kind).ok_or_else(|| ProtocolError::UnknownKey {
            line,
            token: parts[2].to_string(),
        })?;
        let token = parts[3];
        let score: f64 = token.parse().map_err(|_| ProtocolError::InvalidScore {
            line,
            token: token.to_string(),
        })?;
        if !score.is_finite() {
            return Err(ProtocolError::NonFiniteScore {
                line,
                token: token.to_string(),
            });
        }
        let trial_id = parts[0];
        if !seen.insert(trial_id) {
            return Err(ProtocolError::DuplicateTrial {
                line,
                trial_id: trial_id.to_string(),
            });
        }
        set.records.push(ScoreRecord {
            trial_id: trial_id.to_string(),
            attack_label: parts[1].to_string(),
            key,
            score,
        });
    }
    Ok(set)
}

/// Result of restricting a score set to a protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct Joined {
    /// Scores in protocol order with protocol labels.
    pub scores: ScoreSet,
    /// Number of score records whose trial is not in the protocol.
    pub dropped: usize,
}

const MAX_LISTED_MISSING: usize = 10;

/// Restricts `scores` to the trials of `protocol`.
///
/// The protocol is authoritative for attack labels; a score record whose label
/// or key disagrees with the protocol is an error. ASV `target`/`nontarget`
/// keys are accepted against protocol `bonafide` and kept as-is.
pub fn join(protocol: &[TrialRecord], scores: &ScoreSet) -> Result<Joined, ProtocolError> {
    let by_id: HashMap<&str, &ScoreRecord> = scores
        .records
        .iter()
        .map(|r| (r.trial_id.as_str(), r))
        .collect();

    let missing: Vec<&str> = protocol
        .iter()
        .filter(|t| !by_id.contains_key(t.trial_id.as_str()))
        .map(|t| t.trial_id.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(ProtocolError::MissingTrials {
            listed: missing
                .iter()
                .take(MAX_LISTED_MISSING)
                .map(|s| s.to_string())
                .collect(),
            total: missing.len(),
        });
    }

    let mut joined = ScoreSet::new(scores.kind);
    for trial in protocol {
        let rec = by_id[trial.trial_id.as_str()];
        if rec.attack_label != trial.attack_label || !rec.key.matches(trial.key) {
            return Err(ProtocolError::JoinMismatch {
                trial_id: trial.trial_id.clone(),
                score_attack: rec.attack_label.clone(),
                score_key: rec.key.to_string(),
                protocol_attack: trial.attack_label.clone(),
                protocol_key: trial.key.as_str().to_string(),
            });
        }
        joined.records.push(ScoreRecord {
            trial_id: trial.trial_id.clone(),
            attack_label: trial.attack_label.clone(),
            key: rec.key,
            score: rec.score,
        });
    }
    let dropped = scores.records.len() - joined.records.len();
    Ok(Joined {
        scores: joined,
        dropped,
    })
}
