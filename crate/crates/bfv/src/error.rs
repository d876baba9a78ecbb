use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("plaintext modulus {t} does not support batching at n = {n} (need t = 1 mod 2n)")]
    BatchingUnsupported { t: u64, n: usize },

    #[error("too many slot values: {got} > {n}")]
    TooManySlots { got: usize, n: usize },

    #[error("operands belong to different parameter sets")]
    ParamsMismatch,

    #[error("operands use different encodings")]
    EncodingMismatch,

    #[error("decryption failed: noise budget exhausted ({budget} bits)")]
    DecryptionFailure { budget: i64 },

    #[error("estimated noise budget exhausted ({estimate:.1} bits) before {operation}")]
    BudgetExhausted { operation: &'static str, estimate: f64 },

    #[error("ciphertext has {0} components, expected 2")]
    ComponentCount(usize),

    #[error("malformed serialized data: {0}")]
    Malformed(String),
}

pub type Result<T, E = HeError> = std::result::Result<T, E>;
