//! Physical-access simulation: image-source rooms, the attacker's recording
//! and replay chain, and the category taxonomy used to organize trials.
//!
//! Bona fide trials are rendered as talker → microphone. Replay trials are
//! talker → attacker's recorder → replay device → loudspeaker → microphone,
//! inside the same room.

pub mod analysis;
mod category;
mod config;
mod conv;
mod device;
mod render;
mod room;

pub use category::{
    CategoryTable, DeviceRange, DeviceRanges, Level, LevelRanges, PaCategoryLabel, Quality, Range,
};
pub use config::{sample_config, seed_mode, trial_seed, PaConfig, SeedMode};
pub use conv::fft_convolve;
pub use device::{apply_device_samples, apply_replay_device, device_filter, ReplayDeviceSpec};
pub use render::{
    bonafide_rir, generate_dataset, peak_normalize, replay_rirs, simulate_bonafide,
    simulate_replay, RenderedTrial, OUTPUT_PEAK,
};
pub use room::{
    distance, image_sources, rir_image_method, sinc_kernel, Image, RoomSpec, MAX_ORDER_CAP,
    MIN_SOURCE_DISTANCE, SINC_HALF_WIDTH, SPEED_OF_SOUND,
};

use thiserror::Error;

use crate::features::FeatureError;

#[derive(Debug, Error)]
pub enum PaSimError {
    #[error("invalid room: {0}")]
    InvalidRoom(String),
    #[error("{0} position {1:?} is outside the room")]
    OutsideRoom(&'static str, [f64; 3]),
    #[error("source too near microphone: {0:.3} m < {MIN_SOURCE_DISTANCE} m")]
    SourceTooClose(f64),
    #[error("invalid replay device: {0}")]
    InvalidDevice(String),
    #[error("invalid category: {0}")]
    InvalidCategory(String),
    #[error("invalid category table: {0}")]
    InvalidTable(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("no source audio for trial {0}")]
    MissingSource(String),
    #[error("sample rate {got} Hz does not match the configured {expected} Hz")]
    SampleRateMismatch { expected: u32, got: u32 },
    #[error("trial {trial}: {source}")]
    Trial {
        trial: String,
        #[source]
        source: Box<PaSimError>,
    },
    #[error(transparent)]
    Audio(#[from] FeatureError),
    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),
}
