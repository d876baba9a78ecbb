//! Plaintext polynomials and the two encodings.

use crate::error::{HeError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Encoding {
    /// One integer in the constant coefficient.
    Scalar,
    /// Up to `n` independent values in the CRT slots of `Z_t[X]/(X^n + 1)`.
    Batched,
}

impl Encoding {
    pub(crate) fn tag(self) -> u8 {
        match self {
            Encoding::Scalar => 0,
            Encoding::Batched => 1,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Encoding::Scalar),
            1 => Ok(Encoding::Batched),
            _ => Err(HeError::Malformed(format!("unknown encoding tag {tag}"))),
        }
    }
}

/// A polynomial with coefficients in `[0, t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plaintext {
    pub(crate) coeffs: Vec<u64>,
    pub(crate) encoding: Encoding,
    pub(crate) param_id: u64,
}

impl Plaintext {
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn param_id(&self) -> u64 {
        self.param_id
    }

    /// Constant coefficient in `[0, t)`.
    pub fn constant(&self) -> u64 {
        self.coeffs[0]
    }
}
