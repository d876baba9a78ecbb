//! Parameter-specific precomputation shared by every operation.

use std::sync::Arc;

use num_bigint::BigUint;

use crate::encoding::{Encoding, Plaintext};
use crate::error::{HeError, Result};
use crate::ntt::NttTable;
use crate::params::HeParams;
use crate::ring::Ring;

fn big_mod(x: &BigUint, m: u64) -> u64 {
    (x % m).iter_u64_digits().next().unwrap_or(0)
}

/// Precomputed tables for one `(n, Q, t)`. Contexts that differ only in
/// `t` share their ring and accept the same keys.
#[derive(Debug, Clone)]
pub struct HeContext {
    pub(crate) params: HeParams,
    pub(crate) ring: Arc<Ring>,
    pub(crate) param_id: u64,
    pub(crate) ring_id: u64,
    /// `floor(Q/t) mod q_i`.
    pub(crate) delta: Vec<u64>,
    /// `floor(tP/q_j) mod q_i`, indexed `[i][j]` over `Q`.
    pub(crate) sr_q: Vec<Vec<u64>>,
    /// `tP mod q_j`.
    pub(crate) sr_rem: Vec<u64>,
    /// `(tP/p_j) mod q_i`, indexed `[i][j]` over `P`.
    pub(crate) sr_p: Vec<Vec<u64>>,
    /// `tP mod q_i`.
    pub(crate) sr_tp: Vec<u64>,
    pub(crate) plain_ntt: Option<NttTable>,
}

impl HeContext {
    pub fn new(params: HeParams) -> Result<Self> {
        params.validate()?;
        let ring = Arc::new(Ring::new(&params)?);
        Ok(Self::with_ring(params, ring))
    }

    /// Same ring, different plaintext modulus.
    pub fn with_plain_modulus(&self, t: u64) -> Result<Self> {
        let params = self.params.with_plain_modulus(t)?;
        Ok(Self::with_ring(params, Arc::clone(&self.ring)))
    }

    fn with_ring(params: HeParams, ring: Arc<Ring>) -> Self {
        let t = params.t;
        let q_big = &ring.q_big;
        let delta_big = q_big / t;
        let q_vals: Vec<u64> = ring.q.iter().map(|x| x.modulus.value()).collect();
        let delta = q_vals.iter().map(|&q| big_mod(&delta_big, q)).collect();

        let tp = &ring.p_big * t;
        let sr_rem = q_vals.iter().map(|&q| big_mod(&tp, q)).collect();
        let floors: Vec<BigUint> = q_vals.iter().map(|&q| &tp / q).collect();
        let p_quots: Vec<BigUint> = ring.p.iter().map(|x| &tp / x.modulus.value()).collect();
        let sr_q = q_vals
            .iter()
            .map(|&qi| floors.iter().map(|f| big_mod(f, qi)).collect())
            .collect();
        let sr_p = q_vals
            .iter()
            .map(|&qi| p_quots.iter().map(|f| big_mod(f, qi)).collect())
            .collect();
        let sr_tp = q_vals.iter().map(|&q| big_mod(&tp, q)).collect();

        let plain_ntt = if params.supports_batching() {
            NttTable::new(t, params.n)
        } else {
            None
        };
        Self {
            param_id: params.param_id(),
            ring_id: params.ring_id(),
            params,
            ring,
            delta,
            sr_q,
            sr_rem,
            sr_p,
            sr_tp,
            plain_ntt,
        }
    }

    pub fn params(&self) -> &HeParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn t(&self) -> u64 {
        self.params.t
    }

    pub fn param_id(&self) -> u64 {
        self.param_id
    }

    pub fn ring_id(&self) -> u64 {
        self.ring_id
    }

    pub fn log2_q(&self) -> f64 {
        self.params.log2_q()
    }

    /// Signed integer in the constant coefficient.
    pub fn encode_scalar(&self, value: i64) -> Plaintext {
        let mut coeffs = vec![0u64; self.n()];
        coeffs[0] = value.rem_euclid(self.t() as i64) as u64;
        Plaintext {
            coeffs,
            encoding: Encoding::Scalar,
            param_id: self.param_id,
        }
    }

    /// Balanced representative of the constant coefficient, in `(-t/2, t/2]`.
    pub fn decode_scalar(&self, pt: &Plaintext) -> Result<i64> {
        self.check_plain(pt, Encoding::Scalar)?;
        Ok(self.balance(pt.coeffs[0]))
    }

    fn balance(&self, x: u64) -> i64 {
        let t = self.t();
        if x > t / 2 {
            x as i64 - t as i64
        } else {
            x as i64
        }
    }

    /// Packs values (reduced mod `t`) into slots; unused slots are zero.
    pub fn batch_encode(&self, values: &[u64]) -> Result<Plaintext> {
        let table = self.batch_table()?;
        if values.len() > self.n() {
            return Err(HeError::TooManySlots {
                got: values.len(),
                n: self.n(),
            });
        }
        let mut coeffs = vec![0u64; self.n()];
        for (c, &v) in coeffs.iter_mut().zip(values) {
            *c = v % self.t();
        }
        table.inverse(&mut coeffs);
        Ok(Plaintext {
            coeffs,
            encoding: Encoding::Batched,
            param_id: self.param_id,
        })
    }

    pub fn batch_encode_signed(&self, values: &[i64]) -> Result<Plaintext> {
        let t = self.t() as i64;
        let v: Vec<u64> = values.iter().map(|&x| x.rem_euclid(t) as u64).collect();
        self.batch_encode(&v)
    }

    /// All `n` slots, each in `[0, t)`.
    pub fn batch_decode(&self, pt: &Plaintext) -> Result<Vec<u64>> {
        let table = self.batch_table()?;
        self.check_plain(pt, Encoding::Batched)?;
        let mut v = pt.coeffs.clone();
        table.forward(&mut v);
        Ok(v)
    }

    fn batch_table(&self) -> Result<&NttTable> {
        self.plain_ntt.as_ref().ok_or(HeError::BatchingUnsupported {
            t: self.t(),
            n: self.n(),
        })
    }

    pub(crate) fn check_plain(&self, pt: &Plaintext, enc: Encoding) -> Result<()> {
        if pt.param_id != self.param_id {
            return Err(HeError::ParamsMismatch);
        }
        if pt.encoding != enc {
            return Err(HeError::EncodingMismatch);
        }
        Ok(())
    }

    /// Plaintext coefficients lifted to their balanced representatives.
    pub(crate) fn centered_plain(&self, pt: &Plaintext) -> Vec<i64> {
        pt.coeffs.iter().map(|&c| self.balance(c)).collect()
    }
}
