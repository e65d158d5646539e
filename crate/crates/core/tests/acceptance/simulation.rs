//! Replay simulation criteria: reproducibility, seed-space separation and a
//! small end-to-end countermeasure experiment.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use spoofkit::features::{encode_wav, lfcc, AudioBuffer, FeatureMatrix, LfccConfig};
use spoofkit::gmm::{llr_score, train_em, TrainConfig};
use spoofkit::metrics::{det_curve, eer};
use spoofkit::pa_sim::{
    generate_dataset, sample_config, trial_seed, CategoryTable, Level, PaCategoryLabel, RenderedTrial, SeedMode,
};
use spoofkit::protocol::{TrialKey, TrialRecord, BONAFIDE_LABEL};

use crate::fixtures::synthetic_speech;
use crate::{all, Outcome};

const FS: u32 = 16000;

fn record(id: String, acoustic: String, replay: Option<String>) -> TrialRecord {
    let key = if replay.is_some() { TrialKey::Spoof } else { TrialKey::Bonafide };
    TrialRecord {
        speaker_id: "PA_0001".into(),
        subset: spoofkit::protocol::Subset::infer(&id),
        trial_id: id,
        system_id: acoustic,
        attack_label: replay.unwrap_or_else(|| BONAFIDE_LABEL.into()),
        key,
    }
}

fn acoustic_ids() -> Vec<String> {
    let mut ids: Vec<String> = PaCategoryLabel::all().iter().map(|c| c.acoustic_id()).collect();
    ids.dedup();
    ids
}

fn replay_id(attacker: Level, quality: Level) -> String {
    format!("{}{}", level_char(attacker), level_char(quality))
}

fn sources(trials: &[TrialRecord], seed: u64, seconds: f64) -> HashMap<String, AudioBuffer> {
    trials
        .par_iter()
        .enumerate()
        .map(|(i, t)| (t.trial_id.clone(), synthetic_speech(seed * 100_000 + i as u64, seconds, FS)))
        .collect()
}

fn encode_all(r: &[RenderedTrial]) -> Vec<(String, Vec<u8>)> {
    r.iter()
        .map(|t| (t.config_hash.clone(), encode_wav(&t.audio).unwrap()))
        .collect()
}

pub fn determinism() -> Outcome {
    let env = acoustic_ids();
    let trials: Vec<TrialRecord> = (0..12)
        .map(|i| {
            let replay = (i % 3 != 0).then(|| replay_id(Level::ALL[i % 3], Level::ALL[(i / 3) % 3]));
            record(format!("PA_E_{:07}", 100 + i), env[(i * 5) % env.len()].clone(), replay)
        })
        .collect();
    let src = sources(&trials, 9, 0.5);
    let table = CategoryTable::default();
    let first = generate_dataset(&trials, &src, &table, 2024, SeedMode::Eval).unwrap();
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let second = serial.install(|| generate_dataset(&trials, &src, &table, 2024, SeedMode::Eval).unwrap());
    let identical = encode_all(&first) == encode_all(&second);

    let all_cats = PaCategoryLabel::all();
    let hashes = |mode: SeedMode| -> HashSet<String> {
        (0..1000)
            .map(|i| {
                let cat = all_cats[i % all_cats.len()];
                let seed = trial_seed(mode, 2024, &format!("PA_{i:07}"));
                sample_config(&table, cat, seed).unwrap().config_hash()
            })
            .collect()
    };
    let (train, eval) = (hashes(SeedMode::Train), hashes(SeedMode::Eval));
    let overlap = train.intersection(&eval).count();
    all(vec![
        Outcome::check(identical, "12 trials regenerated byte-identically on 1 and many threads"),
        Outcome::check(
            overlap == 0,
            format!("{} train vs {} eval config hashes over 1000 draws, {overlap} shared", train.len(), eval.len()),
        ),
    ])
}

/// 100 training and 100 test trials; test spoofs split evenly over the three
/// device qualities.
fn corpus() -> (Vec<TrialRecord>, Vec<TrialRecord>) {
    let env = acoustic_ids();
    let train = (0..100)
        .map(|i| {
            let replay = (i % 2 == 1).then(|| replay_id(Level::ALL[(i / 2) % 3], Level::ALL[(i / 6) % 3]));
            record(format!("PA_T_{:07}", i), env[i % env.len()].clone(), replay)
        })
        .collect();
    let test = (0..100)
        .map(|i| {
            let replay = (i >= 40).then(|| replay_id(Level::ALL[((i - 40) / 3) % 3], Level::ALL[(i - 40) % 3]));
            record(format!("PA_E_{:07}", i), env[(7 * i) % env.len()].clone(), replay)
        })
        .collect();
    (train, test)
}

fn features(r: &[RenderedTrial], cfg: &LfccConfig) -> Vec<FeatureMatrix> {
    r.par_iter().map(|t| lfcc(&t.audio, cfg).unwrap()).collect()
}

/// Per-quality CM EERs for one master seed.
fn experiment(seed: u64) -> [f64; 3] {
    let (train, test) = corpus();
    let table = CategoryTable::default();
    let src_train = sources(&train, 2 * seed, 1.0);
    let src_test = sources(&test, 2 * seed + 1, 1.0);
    let r_train = generate_dataset(&train, &src_train, &table, seed, SeedMode::Train).unwrap();
    let r_test = generate_dataset(&test, &src_test, &table, seed, SeedMode::Eval).unwrap();
    let cfg = LfccConfig::default();
    let f_train = features(&r_train, &cfg);
    let f_test = features(&r_test, &cfg);

    let gmm = TrainConfig {
        n_components: 32,
        max_iterations: 30,
        seed,
        ..TrainConfig::default()
    };
    let class = |key: TrialKey| {
        let parts: Vec<&FeatureMatrix> = train
            .iter()
            .zip(&f_train)
            .filter(|(t, _)| t.key == key)
            .map(|(_, f)| f)
            .collect();
        train_em(&FeatureMatrix::concat(&parts).unwrap(), &gmm).unwrap()
    };
    let (bona, spoof) = (class(TrialKey::Bonafide), class(TrialKey::Spoof));
    let scores: Vec<f64> = f_test.par_iter().map(|f| llr_score(&bona, &spoof, f).unwrap()).collect();
    let bona_scores: Vec<f64> = test
        .iter()
        .zip(&scores)
        .filter(|(t, _)| t.key == TrialKey::Bonafide)
        .map(|(_, s)| *s)
        .collect();
    Level::ALL.map(|q| {
        let spoofs: Vec<f64> = test
            .iter()
            .zip(&scores)
            .filter(|(t, _)| t.key == TrialKey::Spoof && t.attack_label.ends_with(level_char(q)))
            .map(|(_, s)| *s)
            .collect();
        eer(&det_curve(&bona_scores, &spoofs).unwrap()).rate
    })
}

fn level_char(l: Level) -> char {
    match l {
        Level::A => 'A',
        Level::B => 'B',
        Level::C => 'C',
    }
}

pub fn pipeline() -> Outcome {
    let parts = [1u64, 2, 3]
        .into_iter()
        .map(|seed| {
            let [a, b, c] = experiment(seed);
            Outcome::check(
                c <= a,
                format!(
                    "seed {seed}: EER quality A {:.1}%, B {:.1}%, C {:.1}%",
                    100.0 * a,
                    100.0 * b,
                    100.0 * c
                ),
            )
        })
        .collect();
    all(parts)
}
