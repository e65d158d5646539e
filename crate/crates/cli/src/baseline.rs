//! `train` and `score`: the two-class GMM back-end.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spoofkit::features::FeatureMatrix;
use spoofkit::gmm::{llr_score, read_model, train_em_with_report, write_model, GmmModel, TrainConfig, TrainReport};
use spoofkit::protocol::{parse_protocol, ScoreKey, ScoreKind, ScoreRecord, ScoreSet, Subset, TrialKey, TrialRecord};

use crate::config::RunConfig;
use crate::extract::FeatureStore;
use crate::output::{read_text, Outputs};

pub const BONAFIDE_MODEL: &str = "bonafide.gmm";
pub const SPOOF_MODEL: &str = "spoof.gmm";
pub const TRAIN_LOG: &str = "train_log.json";
pub const SCORE_FILE: &str = "cm_scores.txt";
pub const TRAIN_LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub schema_version: u32,
    pub feature_config_hash: String,
    pub gmm: TrainConfig,
    pub bonafide: ClassLog,
    pub spoof: ClassLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassLog {
    pub utterances: usize,
    pub frames: usize,
    pub report: TrainReport,
}

pub fn load_protocol(path: &Path, subset: Option<Subset>) -> Result<Vec<TrialRecord>> {
    let trials = parse_protocol(&read_text(path)?).with_context(|| format!("protocol {}", path.display()))?;
    Ok(match subset {
        None => trials,
        Some(s) => trials.into_iter().filter(|t| t.subset == Some(s)).collect(),
    })
}

fn pooled_frames(store: &FeatureStore, trials: &[&TrialRecord]) -> Result<FeatureMatrix> {
    let mats = trials
        .par_iter()
        .map(|t| store.load(&t.trial_id))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&FeatureMatrix> = mats.iter().collect();
    Ok(FeatureMatrix::concat(&refs)?)
}

fn train_class(
    store: &FeatureStore,
    trials: &[TrialRecord],
    key: TrialKey,
    cfg: &TrainConfig,
) -> Result<(GmmModel, ClassLog)> {
    let members: Vec<&TrialRecord> = trials.iter().filter(|t| t.key == key).collect();
    let frames = pooled_frames(store, &members)?;
    let (model, report) =
        train_em_with_report(&frames, cfg).with_context(|| format!("training the {} model", key.as_str()))?;
    let log = ClassLog {
        utterances: members.len(),
        frames: frames.frames(),
        report,
    };
    Ok((model, log))
}

pub fn run_train(
    features: &Path,
    protocol: &Path,
    subset: Option<Subset>,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<Outputs> {
    let store = FeatureStore::open(features)?;
    let trials = load_protocol(protocol, subset)?;
    for key in [TrialKey::Bonafide, TrialKey::Spoof] {
        if !trials.iter().any(|t| t.key == key) {
            bail!("missing {} class: the protocol has no {} trials", key.as_str(), key.as_str());
        }
    }
    if let Some(t) = trials.iter().find(|t| !store.contains(&t.trial_id)) {
        bail!("no features for trial '{}'", t.trial_id);
    }
    let (bona, bona_log) = train_class(&store, &trials, TrialKey::Bonafide, &cfg.gmm)?;
    let (spoof, spoof_log) = train_class(&store, &trials, TrialKey::Spoof, &cfg.gmm)?;

    let mut outputs = Outputs::new();
    for (name, model) in [(BONAFIDE_MODEL, &bona), (SPOOF_MODEL, &spoof)] {
        let mut bytes = Vec::new();
        write_model(&mut bytes, model)?;
        outputs.add(out_dir.join(name), bytes);
    }
    let log = TrainLog {
        schema_version: TRAIN_LOG_VERSION,
        feature_config_hash: store.manifest.config_hash.clone(),
        gmm: cfg.gmm.clone(),
        bonafide: bona_log,
        spoof: spoof_log,
    };
    outputs.add_json(out_dir.join(TRAIN_LOG), &log);
    Ok(outputs)
}

pub fn load_model(path: &Path) -> Result<GmmModel> {
    let f = File::open(path).with_context(|| format!("opening model {}", path.display()))?;
    read_model(BufReader::new(f)).with_context(|| format!("reading model {}", path.display()))
}

/// Per-trial log-likelihood ratios, in protocol order.
pub fn score_trials(
    bona: &GmmModel,
    spoof: &GmmModel,
    store: &FeatureStore,
    trials: &[TrialRecord],
) -> Result<ScoreSet> {
    if bona.dims() != spoof.dims() {
        bail!(
            "model dimension mismatch: bona fide {} vs spoof {}",
            bona.dims(),
            spoof.dims()
        );
    }
    let records = trials
        .par_iter()
        .map(|t| {
            let frames = store.load(&t.trial_id)?;
            let score = llr_score(bona, spoof, &frames).with_context(|| format!("scoring trial '{}'", t.trial_id))?;
            Ok(ScoreRecord {
                trial_id: t.trial_id.clone(),
                attack_label: t.attack_label.clone(),
                key: match t.key {
                    TrialKey::Bonafide => ScoreKey::Bonafide,
                    TrialKey::Spoof => ScoreKey::Spoof,
                },
                score,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreSet {
        kind: ScoreKind::Cm,
        records,
    })
}

pub fn run_score(
    models: &Path,
    features: &Path,
    protocol: &Path,
    subset: Option<Subset>,
    out_dir: &Path,
) -> Result<Outputs> {
    let bona = load_model(&models.join(BONAFIDE_MODEL))?;
    let spoof = load_model(&models.join(SPOOF_MODEL))?;
    let store = FeatureStore::open(features)?;
    let trials = load_protocol(protocol, subset)?;
    if let Some(t) = trials.iter().find(|t| !store.contains(&t.trial_id)) {
        bail!("no features for trial '{}'", t.trial_id);
    }
    let scores = score_trials(&bona, &spoof, &store, &trials)?;
    let mut outputs = Outputs::new();
    outputs.add(out_dir.join(SCORE_FILE), scores.emit());
    Ok(outputs)
}
