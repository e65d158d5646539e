use std::collections::HashMap;

use rayon::prelude::*;

use super::config::{sample_config, trial_seed, PaConfig, SeedMode};
use super::conv::fft_convolve;
use super::device::apply_device_samples;
use super::room::rir_image_method;
use super::{CategoryTable, PaCategoryLabel, PaSimError};
use crate::features::AudioBuffer;
use crate::protocol::{TrialKey, TrialRecord};

/// Peak level of every rendered output and of the attacker's recording.
pub const OUTPUT_PEAK: f64 = 0.95;

pub fn peak_normalize(mut x: Vec<f64>, peak: f64) -> Vec<f64> {
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        let g = peak / m;
        x.iter_mut().for_each(|v| *v *= g);
    }
    x
}

fn check_rate(speech: &AudioBuffer, cfg: &PaConfig) -> Result<(), PaSimError> {
    if speech.sample_rate() != cfg.sample_rate {
        return Err(PaSimError::SampleRateMismatch {
            expected: cfg.sample_rate,
            got: speech.sample_rate(),
        });
    }
    Ok(())
}

/// Talker → microphone impulse response of a configuration.
pub fn bonafide_rir(cfg: &PaConfig) -> Result<Vec<f64>, PaSimError> {
    rir_image_method(&cfg.room, cfg.talker_pos, cfg.mic_pos, cfg.max_order, cfg.sample_rate)
}

/// Talker → attacker's recorder, and loudspeaker → microphone.
pub fn replay_rirs(cfg: &PaConfig) -> Result<(Vec<f64>, Vec<f64>), PaSimError> {
    let record = rir_image_method(&cfg.room, cfg.talker_pos, cfg.attacker_pos, cfg.max_order, cfg.sample_rate)?;
    let playback = rir_image_method(&cfg.room, cfg.attacker_pos, cfg.mic_pos, cfg.max_order, cfg.sample_rate)?;
    Ok((record, playback))
}

/// Speech heard at the microphone from the talker, peak-normalized.
pub fn simulate_bonafide(speech: &AudioBuffer, cfg: &PaConfig) -> Result<AudioBuffer, PaSimError> {
    check_rate(speech, cfg)?;
    let h = bonafide_rir(cfg)?;
    let y = peak_normalize(fft_convolve(speech.samples(), &h), OUTPUT_PEAK);
    Ok(AudioBuffer::new(y, cfg.sample_rate)?)
}

/// Recording at the attacker's position, replay through the device, then
/// propagation from the loudspeaker to the microphone. The recorder is ideal;
/// its capture is peak-normalized before the device.
pub fn simulate_replay(speech: &AudioBuffer, cfg: &PaConfig) -> Result<AudioBuffer, PaSimError> {
    check_rate(speech, cfg)?;
    let (record, playback) = replay_rirs(cfg)?;
    let captured = peak_normalize(fft_convolve(speech.samples(), &record), OUTPUT_PEAK);
    let replayed = apply_device_samples(&captured, &cfg.device, cfg.sample_rate)?;
    let y = peak_normalize(fft_convolve(&replayed, &playback), OUTPUT_PEAK);
    Ok(AudioBuffer::new(y, cfg.sample_rate)?)
}

/// One rendered trial.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedTrial {
    pub record: TrialRecord,
    pub config: PaConfig,
    pub config_hash: String,
    pub audio: AudioBuffer,
}

/// Renders every trial from its source utterance (keyed by trial id).
///
/// Each trial's seed depends only on `(mode, master_seed, trial_id)`, so the
/// result is independent of scheduling and of the other trials.
pub fn generate_dataset(
    trials: &[TrialRecord],
    sources: &HashMap<String, AudioBuffer>,
    table: &CategoryTable,
    master_seed: u64,
    mode: SeedMode,
) -> Result<Vec<RenderedTrial>, PaSimError> {
    table.validate()?;
    trials
        .par_iter()
        .map(|rec| {
            let wrap = |e: PaSimError| PaSimError::Trial {
                trial: rec.trial_id.clone(),
                source: Box::new(e),
            };
            let speech = sources
                .get(&rec.trial_id)
                .ok_or_else(|| PaSimError::MissingSource(rec.trial_id.clone()))?;
            let category = PaCategoryLabel::from_record(rec).map_err(wrap)?;
            let seed = trial_seed(mode, master_seed, &rec.trial_id);
            let config = sample_config(table, category, seed).map_err(wrap)?;
            let audio = match rec.key {
                TrialKey::Bonafide => simulate_bonafide(speech, &config),
                TrialKey::Spoof => simulate_replay(speech, &config),
            }
            .map_err(wrap)?;
            Ok(RenderedTrial {
                record: rec.clone(),
                config_hash: config.config_hash(),
                config,
                audio,
            })
        })
        .collect()
}
