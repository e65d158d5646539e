//! Optional reproduction of the published baseline results on the public
//! challenge database.
//!
//! Set `SPOOFKIT_CHALLENGE_DIR` to a directory holding `challenge.toml`:
//!
//! ```toml
//! # Paths are relative to this file. Either section may be omitted.
//! [la]
//! train_protocol = "LA/ASVspoof2019.LA.cm.train.trn.txt"
//! train_audio = "LA/train.lst"   # lines `TRIAL_ID PATH.wav`
//! eval_protocol = "LA/ASVspoof2019.LA.cm.eval.trl.txt"
//! eval_audio = "LA/eval.lst"
//! asv_scores = "LA/asv_eval.txt" # TRIAL_ID ATTACK KEY SCORE, keys target/nontarget/spoof
//!
//! [pa]
//! # same keys
//! ```
//!
//! Audio must be WAV. Protocols may use the official `-` for the bona fide
//! attack column.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use spoofkit::features::{
    append_deltas, cqcc_static, cqt_geometry, lfcc, read_wav, AudioBuffer, CqccConfig, FeatureMatrix, LfccConfig,
};
use spoofkit::gmm::{llr_score, train_em, GmmModel, TrainConfig};
use spoofkit::metrics::{evaluate_tandem, CostModel, TandemOptions};
use spoofkit::protocol::{
    parse_protocol, parse_scores, ScoreKey, ScoreKind, ScoreRecord, ScoreSet, TrialKey, TrialRecord, BONAFIDE_LABEL,
};

use crate::{all, Outcome};

pub const ENV_VAR: &str = "SPOOFKIT_CHALLENGE_DIR";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Condition {
    train_protocol: PathBuf,
    train_audio: PathBuf,
    eval_protocol: PathBuf,
    eval_audio: PathBuf,
    asv_scores: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Challenge {
    la: Option<Condition>,
    pa: Option<Condition>,
}

/// Published pooled (min t-DCF, CM EER %) for B01 (CQCC) and B02 (LFCC).
const TARGETS: [(&str, [(f64, f64); 2]); 2] = [("LA", [(0.2366, 9.57), (0.2116, 8.09)]), ("PA", [(0.2454, 11.04), (0.3017, 13.54)])];
const TDCF_TOL: f64 = 0.03;
const EER_TOL_PCT: f64 = 1.5;

#[derive(Clone, Copy)]
enum Front {
    Cqcc,
    Lfcc,
}

/// Replaces the official `-` bona fide attack label.
fn normalize_protocol(text: &str) -> String {
    text.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split_whitespace().collect();
            if f.len() == 5 && f[4] == "bonafide" && f[3] == "-" {
                f[3] = BONAFIDE_LABEL;
            }
            f.join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn read(base: &Path, p: &Path) -> Result<String, String> {
    let path = base.join(p);
    std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))
}

fn protocol(base: &Path, p: &Path) -> Result<Vec<TrialRecord>, String> {
    parse_protocol(&normalize_protocol(&read(base, p)?)).map_err(|e| format!("{}: {e}", p.display()))
}

fn audio_list(base: &Path, p: &Path) -> Result<HashMap<String, PathBuf>, String> {
    let list_dir = base.join(p).parent().map(Path::to_path_buf).unwrap_or_default();
    read(base, p)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| match l.split_whitespace().collect::<Vec<_>>().as_slice() {
            [id, path] => Ok((id.to_string(), list_dir.join(path))),
            _ => Err(format!("{}: expected 'TRIAL_ID PATH' in '{l}'", p.display())),
        })
        .collect()
}

/// CQCCs for clips shorter than the longest CQT window: the signal is
/// zero-extended, which the transform already assumes outside the signal,
/// and only frames centred inside the original clip are kept.
fn cqcc_any_length(audio: &AudioBuffer, cfg: &CqccConfig) -> Result<FeatureMatrix, String> {
    let need = cqt_geometry(cfg, audio.sample_rate()).map_err(|e| e.to_string())?.longest_window();
    let frames = (audio.len() - 1) / cfg.hop + 1;
    let mut x = audio.samples().to_vec();
    if x.len() < need {
        x.resize(need, 0.0);
    }
    let padded = AudioBuffer::new(x, audio.sample_rate()).map_err(|e| e.to_string())?;
    let full = cqcc_static(&padded, cfg).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<f64>> = full.rows().take(frames).map(|r| r.to_vec()).collect();
    let stat = FeatureMatrix::from_rows(&rows).map_err(|e| e.to_string())?;
    Ok(append_deltas(&stat, cfg.delta_window))
}

fn extract(front: Front, path: &Path) -> Result<FeatureMatrix, String> {
    let audio = read_wav(path).map_err(|e| format!("{}: {e}", path.display()))?;
    match front {
        Front::Cqcc => cqcc_any_length(&audio, &CqccConfig::default()),
        Front::Lfcc => lfcc(&audio, &LfccConfig::default()).map_err(|e| e.to_string()),
    }
    .map_err(|e| format!("{}: {e}", path.display()))
}

fn features(front: Front, trials: &[TrialRecord], audio: &HashMap<String, PathBuf>) -> Result<Vec<FeatureMatrix>, String> {
    trials
        .par_iter()
        .map(|t| {
            let p = audio.get(&t.trial_id).ok_or_else(|| format!("no audio for trial '{}'", t.trial_id))?;
            extract(front, p)
        })
        .collect()
}

fn train_class(trials: &[TrialRecord], feats: &[FeatureMatrix], key: TrialKey) -> Result<GmmModel, String> {
    let parts: Vec<&FeatureMatrix> = trials.iter().zip(feats).filter(|(t, _)| t.key == key).map(|(_, f)| f).collect();
    let frames = FeatureMatrix::concat(&parts).map_err(|e| e.to_string())?;
    train_em(&frames, &TrainConfig::default()).map_err(|e| e.to_string())
}

/// Pooled (min t-DCF, CM EER %) of one baseline.
fn baseline(base: &Path, c: &Condition, front: Front) -> Result<(f64, f64), String> {
    let train = protocol(base, &c.train_protocol)?;
    let eval = protocol(base, &c.eval_protocol)?;
    let f_train = features(front, &train, &audio_list(base, &c.train_audio)?)?;
    let bona = train_class(&train, &f_train, TrialKey::Bonafide)?;
    let spoof = train_class(&train, &f_train, TrialKey::Spoof)?;
    drop(f_train);
    let f_eval = features(front, &eval, &audio_list(base, &c.eval_audio)?)?;
    let records = eval
        .par_iter()
        .zip(&f_eval)
        .map(|(t, f)| {
            Ok(ScoreRecord {
                trial_id: t.trial_id.clone(),
                attack_label: t.attack_label.clone(),
                key: if t.key == TrialKey::Bonafide { ScoreKey::Bonafide } else { ScoreKey::Spoof },
                score: llr_score(&bona, &spoof, f).map_err(|e| e.to_string())?,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    let cm = ScoreSet {
        kind: ScoreKind::Cm,
        records,
    };
    let asv = parse_scores(&read(base, &c.asv_scores)?, ScoreKind::Asv).map_err(|e| e.to_string())?;
    let ev = evaluate_tandem(&cm, &asv, &CostModel::default(), &TandemOptions::default()).map_err(|e| e.to_string())?;
    Ok((ev.pooled.tdcf.min_tdcf, 100.0 * ev.pooled.cm_eer.rate))
}

pub fn reproduce() -> Outcome {
    let Some(dir) = std::env::var_os(ENV_VAR) else {
        return Outcome::skipped(format!("set {ENV_VAR} to a directory with challenge.toml to run"));
    };
    let base = PathBuf::from(dir);
    let cfg: Challenge = match read(&base, Path::new("challenge.toml")).and_then(|t| toml::from_str(&t).map_err(|e| e.to_string())) {
        Ok(c) => c,
        Err(e) => return Outcome::check(false, format!("challenge.toml: {e}")),
    };
    let mut parts = Vec::new();
    for (name, targets) in TARGETS {
        let cond = if name == "LA" { &cfg.la } else { &cfg.pa };
        let Some(cond) = cond else {
            parts.push(Outcome::skipped(format!("{name} not configured")));
            continue;
        };
        for (i, front) in [Front::Cqcc, Front::Lfcc].into_iter().enumerate() {
            let (want_t, want_e) = targets[i];
            let label = format!("{name} B0{}", i + 1);
            parts.push(match baseline(&base, cond, front) {
                Ok((t, e)) => Outcome::check(
                    (t - want_t).abs() <= TDCF_TOL && (e - want_e).abs() <= EER_TOL_PCT,
                    format!("{label}: min t-DCF {t:.4} (published {want_t}), EER {e:.2}% (published {want_e}%)"),
                ),
                Err(e) => Outcome::check(false, format!("{label}: {e}")),
            });
        }
    }
    all(parts)
}
