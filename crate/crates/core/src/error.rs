use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("width {width} out of range {min}..={max}")]
    WidthOutOfRange { width: usize, min: usize, max: usize },

    #[error("expected {expected} input bits, got {got}")]
    InputLength { expected: usize, got: usize },

    #[error("gate {index} is not in topological order (output {output}, inputs {inputs:?})")]
    NotTopological {
        index: usize,
        output: u32,
        inputs: [u32; 2],
    },

    #[error("gate {index}: {reason}")]
    MalformedGate { index: usize, reason: String },

    #[error("output wire {0} does not exist")]
    UnknownOutput(u32),

    #[error("lookup table has {got} entries, expected 2^{index_bits} = {expected}")]
    TableLength {
        got: usize,
        index_bits: usize,
        expected: usize,
    },

    #[error("table value {value} at index {index} does not fit in {bits} bits")]
    ValueOverflow { index: usize, value: u128, bits: usize },

    #[error("internal width {bits} exceeds the supported maximum of {max} bits")]
    WidthOverflow { bits: usize, max: usize },

    #[error("invalid fixed-point spec: total_bits={total}, frac_bits={frac}")]
    FixedPoint { total: u32, frac: u32 },

    #[error("no group named `{0}`")]
    UnknownGroup(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = CircuitError> = std::result::Result<T, E>;
