use dmsc_bfv::HeError;
use dmsc_core::CircuitError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("statistic undefined: margin {0} is zero")]
    ZeroMargin(&'static str),

    #[error("allele frequencies undefined for an empty population")]
    EmptyPopulation,

    #[error("threshold must have a positive denominator and non-negative numerator")]
    BadThreshold,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate sigmoid range: {0}")]
    DegenerateRange(String),

    #[error("value {value} is not representable with {total_bits} bits ({frac_bits} fractional)")]
    Unrepresentable { value: f64, total_bits: u32, frac_bits: u32 },

    #[error("count {value} does not fit in {bits} bits")]
    CountOverflow { value: u64, bits: usize },

    #[error("HE plan rejected: {0}")]
    PlanRejected(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Circuit(#[from] CircuitError),

    #[error(transparent)]
    He(#[from] HeError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = AnalyticsError> = std::result::Result<T, E>;
