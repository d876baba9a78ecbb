use dmsc_analytics::AnalyticsError;
use dmsc_bfv::HeError;
use dmsc_core::CircuitError;
use dmsc_garble::GarbleError;
use thiserror::Error;

use crate::message::MessageType;
use crate::role::Role;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("malformed frame: {0}")]
    Malformed(String),

    #[error("frame for session {got:#x}, expected {expected:#x}")]
    WrongSession { expected: u64, got: u64 },

    #[error("frame from {from} out of order: expected sequence {expected}, got {got}")]
    OutOfOrder { from: Role, expected: u64, got: u64 },

    #[error("{ty:?} is not allowed from {from} to {to}")]
    ForbiddenRoute { ty: MessageType, from: Role, to: Role },

    #[error("{role} did not expect {ty:?} at this point")]
    UnexpectedMessage { role: Role, ty: MessageType },

    #[error("frame addressed to {to} delivered to {at}")]
    Misdelivered { to: Role, at: Role },

    #[error("connection lost: {0}")]
    ConnectionLost(String),

    #[error("remote {role} aborted: {message}")]
    RemoteAbort { role: Role, message: String },

    #[error("unknown backend `{0}`")]
    UnknownBackend(String),

    #[error("unknown computation `{0}`")]
    UnknownComputation(String),

    #[error("backend `{backend}` cannot run `{computation}`")]
    Unsupported { backend: String, computation: String },

    #[error("invalid session: {0}")]
    InvalidSession(String),

    #[error("session ended without a result for {0}")]
    NoResult(Role),

    #[error(transparent)]
    Analytics(#[from] AnalyticsError),

    #[error(transparent)]
    He(#[from] HeError),

    #[error(transparent)]
    Garble(#[from] GarbleError),

    #[error(transparent)]
    Circuit(#[from] CircuitError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = MarketError> = std::result::Result<T, E>;
