use crate::error::{CircuitError, Result};

/// Two's-complement fixed-point format: `total_bits` wide with
/// `frac_bits` fractional bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedPointSpec {
    total_bits: u32,
    frac_bits: u32,
}

impl FixedPointSpec {
    pub fn new(total_bits: u32, frac_bits: u32) -> Result<Self> {
        if frac_bits >= total_bits || total_bits > 64 {
            return Err(CircuitError::FixedPoint {
                total: total_bits,
                frac: frac_bits,
            });
        }
        Ok(Self {
            total_bits,
            frac_bits,
        })
    }

    pub fn total_bits(&self) -> u32 {
        self.total_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn scale(&self) -> f64 {
        (1u64 << self.frac_bits) as f64
    }

    pub fn min_raw(&self) -> i64 {
        if self.total_bits == 64 {
            i64::MIN
        } else {
            -(1i64 << (self.total_bits - 1))
        }
    }

    pub fn max_raw(&self) -> i64 {
        if self.total_bits == 64 {
            i64::MAX
        } else {
            (1i64 << (self.total_bits - 1)) - 1
        }
    }

    pub fn fits(&self, raw: i64) -> bool {
        raw >= self.min_raw() && raw <= self.max_raw()
    }

    /// Rounds `x` to the nearest representable value, saturating at the
    /// range edges.
    pub fn quantize(&self, x: f64) -> i64 {
        let r = (x * self.scale()).round();
        r.clamp(self.min_raw() as f64, self.max_raw() as f64) as i64
    }

    pub fn to_f64(&self, raw: i64) -> f64 {
        raw as f64 / self.scale()
    }
}

impl Default for FixedPointSpec {
    fn default() -> Self {
        Self {
            total_bits: 16,
            frac_bits: 8,
        }
    }
}
