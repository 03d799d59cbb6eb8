//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("UE {ue} is in {actual} mode but {expected} mode was required")]
    WrongMode {
        ue: usize,
        expected: &'static str,
        actual: &'static str,
    },

    #[error("co-located transceiver pair (zero distance)")]
    ZeroDistance,

    #[error("xi must be strictly positive, got {0}")]
    NonPositiveXi(f64),

    #[error("zero channel gain")]
    ZeroGain,

    #[error("discount factor must lie in [0, 1), got {0}")]
    BadDiscount(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("replay memory holds {have} transitions but batch size is {need}")]
    BatchTooLarge { have: usize, need: usize },

    #[error("state space has {states} states, above the cap of {cap}")]
    StateSpaceTooLarge { states: usize, cap: usize },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
