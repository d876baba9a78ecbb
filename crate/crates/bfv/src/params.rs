use sha2::{Digest, Sha256};

use crate::error::{HeError, Result};
use crate::modarith::is_prime;

/// 60-bit primes congruent to 1 mod 2^14, so they support negacyclic NTTs
/// for every ring degree up to 8192.
pub const PRIMES_60: [u64; 12] = [
    1152921504606830593,
    1152921504606748673,
    1152921504606683137,
    1152921504606601217,
    1152921504606584833,
    1152921504606109697,
    1152921504605962241,
    1152921504605913089,
    1152921504605847553,
    1152921504605618177,
    1152921504604979201,
    1152921504604766209,
];

/// 54-bit primes congruent to 1 mod 2^14.
pub const PRIMES_54: [u64; 3] = [18014398508400641, 18014398508138497, 18014398507892737];

/// Small batching-friendly plaintext primes (t = 1 mod 2^14).
pub const PLAIN_PRIMES: [u64; 8] = [65537, 114689, 147457, 163841, 557057, 638977, 737281, 786433];

/// Ring and plaintext parameters. Desk-scale, not production-audited: no
/// lattice security estimate is performed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HeParams {
    pub n: usize,
    pub q_primes: Vec<u64>,
    pub t: u64,
    /// Centered-binomial parameter; standard deviation is `sqrt(eta / 2)`.
    pub noise_eta: u32,
    /// Relinearization digit width in bits.
    pub relin_digit_bits: u32,
}

impl HeParams {
    pub fn new(n: usize, q_primes: Vec<u64>, t: u64) -> Result<Self> {
        let p = Self {
            n,
            q_primes,
            t,
            noise_eta: 21,
            relin_digit_bits: 30,
        };
        p.validate()?;
        Ok(p)
    }

    /// n = 4096 with a ~108-bit modulus (two 54-bit primes).
    pub fn n4096() -> Self {
        Self::new(4096, PRIMES_54[..2].to_vec(), 65537).expect("valid preset")
    }

    /// n = 8192 with a ~180-bit modulus (three 60-bit primes). This sits
    /// below the 218-bit ceiling commonly used for 128-bit security at this
    /// degree.
    pub fn n8192() -> Self {
        Self::new(8192, PRIMES_60[..3].to_vec(), 65537).expect("valid preset")
    }

    pub fn preset(n: usize) -> Result<Self> {
        match n {
            4096 => Ok(Self::n4096()),
            8192 => Ok(Self::n8192()),
            1024 | 2048 => Self::new(n, PRIMES_54[..2].to_vec(), 65537),
            _ => Err(HeError::InvalidParams(format!("no preset for n = {n}"))),
        }
    }

    pub fn with_plain_modulus(&self, t: u64) -> Result<Self> {
        let mut p = self.clone();
        p.t = t;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HeError::InvalidParams(m));
        if !matches!(self.n, 1024 | 2048 | 4096 | 8192) {
            return bad(format!("ring degree {} not in {{1024, 2048, 4096, 8192}}", self.n));
        }
        if self.q_primes.is_empty() {
            return bad("empty coefficient modulus".into());
        }
        let two_n = 2 * self.n as u64;
        for (i, &q) in self.q_primes.iter().enumerate() {
            if q >= 1 << 61 || !is_prime(q) || q % two_n != 1 {
                return bad(format!("q[{i}] = {q} is not an NTT-friendly prime below 2^61"));
            }
            if self.q_primes[..i].contains(&q) {
                return bad(format!("duplicate prime {q}"));
            }
        }
        if self.t < 2 {
            return bad("plaintext modulus must be at least 2".into());
        }
        if (self.t as f64).log2() >= self.log2_q() {
            return bad(format!("plaintext modulus t = {} is not below q", self.t));
        }
        if !(1..=62).contains(&self.relin_digit_bits) {
            return bad("relinearization digit width must be in 1..=62".into());
        }
        if self.noise_eta == 0 {
            return bad("noise parameter must be positive".into());
        }
        Ok(())
    }

    pub fn log2_q(&self) -> f64 {
        self.q_primes.iter().map(|&q| (q as f64).log2()).sum()
    }

    pub fn noise_stddev(&self) -> f64 {
        (self.noise_eta as f64 / 2.0).sqrt()
    }

    pub fn supports_batching(&self) -> bool {
        is_prime(self.t) && self.t % (2 * self.n as u64) == 1
    }

    /// Identifies the ring (n, q, noise); keys are valid for every `t`
    /// over the same ring.
    pub fn ring_id(&self) -> u64 {
        let mut h = Sha256::new();
        h.update(b"dmsc-ring");
        h.update((self.n as u64).to_le_bytes());
        for q in &self.q_primes {
            h.update(q.to_le_bytes());
        }
        h.update(self.noise_eta.to_le_bytes());
        h.update(self.relin_digit_bits.to_le_bytes());
        u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
    }

    /// Identifies the full parameter set including `t`.
    pub fn param_id(&self) -> u64 {
        let mut h = Sha256::new();
        h.update(self.ring_id().to_le_bytes());
        h.update(self.t.to_le_bytes());
        u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
    }
}
