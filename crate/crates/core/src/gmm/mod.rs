//! Diagonal-covariance Gaussian mixtures: EM training and log-likelihood-ratio
//! scoring for the bona fide / spoof back-end.

mod io;
mod model;
mod train;

pub use io::{read_model, write_model, GMM_MAGIC, GMM_VERSION};
pub use model::{llr_score, GmmModel};
pub use train::{train_em, train_em_with_report, TrainConfig, TrainReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GmmError {
    #[error("{frames} training frames cannot support {components} components")]
    TooFewFrames { frames: usize, components: usize },
    #[error("non-finite feature value")]
    NonFinite,
    #[error("dimension mismatch: model has {expected} dims, features have {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("malformed model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
