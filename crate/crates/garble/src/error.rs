use dmsc_core::CircuitError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GarbleError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),

    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },

    #[error("garbled circuit was produced for a different circuit")]
    HashMismatch,

    #[error("expected {expected} garbled rows, got {got}")]
    RowCount { expected: usize, got: usize },

    #[error("malformed garbled data: {0}")]
    Malformed(String),
}

pub type Result<T, E = GarbleError> = std::result::Result<T, E>;
