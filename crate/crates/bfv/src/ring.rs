//! RNS polynomial arithmetic in `Z_Q[X]/(X^n + 1)` and the exact basis
//! extension used by ciphertext multiplication.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{HeError, Result};
use crate::modarith::Modulus;
use crate::ntt::NttTable;
use crate::params::{HeParams, PRIMES_60};

/// A polynomial as one residue vector per prime of its basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RnsPoly {
    pub limbs: Vec<Vec<u64>>,
}

impl RnsPoly {
    pub fn zero(n: usize, primes: usize) -> Self {
        Self {
            limbs: vec![vec![0; n]; primes],
        }
    }
}

/// Precomputed data for one ring `(n, Q)`, plus an auxiliary basis `P`
/// large enough to hold exact ciphertext tensor products.
#[derive(Debug)]
pub struct Ring {
    pub n: usize,
    pub q: Vec<NttTable>,
    pub p: Vec<NttTable>,
    pub q_big: BigUint,
    /// `(Q/q_i)^{-1} mod q_i` and its Shoup companion.
    q_hat_inv: Vec<(u64, u64)>,
    /// `(Q/q_i) mod p_j`, indexed `[i][j]`.
    q_hat_mod_p: Vec<Vec<u64>>,
    /// `Q mod p_j`.
    q_mod_p: Vec<u64>,
    /// CRT reconstruction coefficients `(Q/q_i) * [(Q/q_i)^{-1}]_{q_i}`.
    crt_q: Vec<BigUint>,
    /// `(QP/e_j)^{-1} mod e_j` over the extended basis `Q ∪ P`.
    e_hat_inv: Vec<(u64, u64)>,
    pub p_big: BigUint,
}

impl Ring {
    pub fn new(params: &HeParams) -> Result<Self> {
        let n = params.n;
        let q: Vec<NttTable> = params
            .q_primes
            .iter()
            .map(|&p| {
                NttTable::new(p, n)
                    .ok_or_else(|| HeError::InvalidParams(format!("{p} has no 2n-th root of unity")))
            })
            .collect::<Result<_>>()?;
        let q_big: BigUint = params.q_primes.iter().map(|&p| BigUint::from(p)).product();

        // Tensor coefficients are bounded by n * Q^2 / 2 in magnitude; the
        // extended modulus QP must exceed twice that.
        let need_bits = params.log2_q() + (n as f64).log2() + 4.0;
        let mut p = Vec::new();
        let mut p_bits = 0.0;
        for &cand in PRIMES_60.iter().filter(|c| !params.q_primes.contains(c)) {
            if p_bits >= need_bits {
                break;
            }
            p.push(NttTable::new(cand, n).expect("pool primes are NTT-friendly"));
            p_bits += (cand as f64).log2();
        }
        if p_bits < need_bits {
            return Err(HeError::InvalidParams("coefficient modulus too large for the auxiliary basis".into()));
        }
        let p_big: BigUint = p.iter().map(|t| BigUint::from(t.modulus.value())).product();

        let big_mod = |x: &BigUint, m: u64| -> u64 {
            let r = x % m;
            r.iter_u64_digits().next().unwrap_or(0)
        };

        let mut q_hat_inv = Vec::new();
        let mut q_hat_mod_p = Vec::new();
        let mut crt_q = Vec::new();
        for t in &q {
            let qi = t.modulus.value();
            let q_hat = &q_big / qi;
            let inv = t.modulus.inv(big_mod(&q_hat, qi));
            q_hat_inv.push((inv, t.modulus.shoup(inv)));
            q_hat_mod_p.push(p.iter().map(|pt| big_mod(&q_hat, pt.modulus.value())).collect());
            crt_q.push((&q_hat * inv) % &q_big);
        }
        let q_mod_p = p.iter().map(|pt| big_mod(&q_big, pt.modulus.value())).collect();

        let e_big = &q_big * &p_big;
        let e_hat_inv = q
            .iter()
            .chain(&p)
            .map(|t| {
                let e = t.modulus.value();
                let inv = t.modulus.inv(big_mod(&(&e_big / e), e));
                (inv, t.modulus.shoup(inv))
            })
            .collect();

        Ok(Self {
            n,
            q,
            p,
            q_big,
            q_hat_inv,
            q_hat_mod_p,
            q_mod_p,
            crt_q,
            e_hat_inv,
            p_big,
        })
    }

    /// Moduli of the extended basis `Q ∪ P`.
    pub fn ext_tables(&self) -> impl Iterator<Item = &NttTable> {
        self.q.iter().chain(&self.p)
    }

    /// Embeds small signed coefficients into the `Q` basis.
    pub fn from_signed(&self, coeffs: &[i64]) -> RnsPoly {
        RnsPoly {
            limbs: self
                .q
                .iter()
                .map(|t| coeffs.iter().map(|&c| t.modulus.reduce_i64(c)).collect())
                .collect(),
        }
    }

    pub fn add(&self, a: &RnsPoly, b: &RnsPoly) -> RnsPoly {
        self.zip_limbs(a, b, |m, x, y| m.add(x, y))
    }

    pub fn sub(&self, a: &RnsPoly, b: &RnsPoly) -> RnsPoly {
        self.zip_limbs(a, b, |m, x, y| m.sub(x, y))
    }

    /// Pointwise product; both operands in NTT form.
    pub fn mul_pointwise(&self, a: &RnsPoly, b: &RnsPoly) -> RnsPoly {
        self.zip_limbs(a, b, |m, x, y| m.mul(x, y))
    }

    /// `acc += a * b` pointwise.
    pub fn mul_acc(&self, acc: &mut RnsPoly, a: &RnsPoly, b: &RnsPoly) {
        for ((t, acc), (a, b)) in self.q.iter().zip(&mut acc.limbs).zip(a.limbs.iter().zip(&b.limbs)) {
            let m = &t.modulus;
            for ((r, &x), &y) in acc.iter_mut().zip(a).zip(b) {
                *r = m.add(*r, m.mul(x, y));
            }
        }
    }

    pub fn neg(&self, a: &RnsPoly) -> RnsPoly {
        RnsPoly {
            limbs: self
                .q
                .iter()
                .zip(&a.limbs)
                .map(|(t, l)| l.iter().map(|&x| t.modulus.neg(x)).collect())
                .collect(),
        }
    }

    /// Multiplies every coefficient by a signed scalar.
    pub fn mul_scalar(&self, a: &RnsPoly, c: i64) -> RnsPoly {
        RnsPoly {
            limbs: self
                .q
                .iter()
                .zip(&a.limbs)
                .map(|(t, l)| {
                    let m = &t.modulus;
                    let c = m.reduce_i64(c);
                    let cs = m.shoup(c);
                    l.iter().map(|&x| m.mul_shoup(x, c, cs)).collect()
                })
                .collect(),
        }
    }

    fn zip_limbs(&self, a: &RnsPoly, b: &RnsPoly, f: impl Fn(&Modulus, u64, u64) -> u64) -> RnsPoly {
        RnsPoly {
            limbs: self
                .q
                .iter()
                .zip(a.limbs.iter().zip(&b.limbs))
                .map(|(t, (x, y))| x.iter().zip(y).map(|(&u, &v)| f(&t.modulus, u, v)).collect())
                .collect(),
        }
    }

    pub fn to_ntt(&self, a: &mut RnsPoly) {
        for (t, l) in self.q.iter().zip(&mut a.limbs) {
            t.forward(l);
        }
    }

    pub fn from_ntt(&self, a: &mut RnsPoly) {
        for (t, l) in self.q.iter().zip(&mut a.limbs) {
            t.inverse(l);
        }
    }

    /// Exact integer in `[0, Q)` for coefficient `j`.
    pub fn compose(&self, a: &RnsPoly, j: usize) -> BigUint {
        let mut acc = BigUint::zero();
        for (limb, c) in a.limbs.iter().zip(&self.crt_q) {
            acc += c * limb[j];
        }
        acc % &self.q_big
    }

    /// Lifts a `Q`-basis polynomial to `Q ∪ P` using its centered
    /// representative, so that products computed in the larger basis equal
    /// the integer products of centered coefficients.
    pub fn extend(&self, a: &RnsPoly) -> RnsPoly {
        let n = self.n;
        let k = self.q.len();
        let mut out: Vec<Vec<u64>> = a.limbs.clone();
        out.extend(std::iter::repeat_with(|| vec![0u64; n]).take(self.p.len()));
        let mut z = vec![0u64; k];
        for c in 0..n {
            let mut frac = 0.0f64;
            for i in 0..k {
                let m = &self.q[i].modulus;
                let (inv, inv_s) = self.q_hat_inv[i];
                z[i] = m.mul_shoup(a.limbs[i][c], inv, inv_s);
                frac += z[i] as f64 / m.value() as f64;
            }
            // x = sum z_i * Q/q_i - v * Q is the centered representative.
            let v = frac.round() as u64;
            for (j, pt) in self.p.iter().enumerate() {
                let m = &pt.modulus;
                let mut acc: u128 = 0;
                for i in 0..k {
                    acc += z[i] as u128 * self.q_hat_mod_p[i][j] as u128;
                }
                let s = m.reduce_u128(acc);
                out[k + j][c] = m.sub(s, m.mul(v % m.value(), self.q_mod_p[j]));
            }
        }
        RnsPoly { limbs: out }
    }

    pub fn to_ntt_ext(&self, a: &mut RnsPoly) {
        for (t, l) in self.ext_tables().zip(&mut a.limbs) {
            t.forward(l);
        }
    }

    pub fn from_ntt_ext(&self, a: &mut RnsPoly) {
        for (t, l) in self.ext_tables().zip(&mut a.limbs) {
            t.inverse(l);
        }
    }

    pub fn mul_pointwise_ext(&self, a: &RnsPoly, b: &RnsPoly) -> RnsPoly {
        RnsPoly {
            limbs: self
                .ext_tables()
                .zip(a.limbs.iter().zip(&b.limbs))
                .map(|(t, (x, y))| x.iter().zip(y).map(|(&u, &v)| t.modulus.mul(u, v)).collect())
                .collect(),
        }
    }

    pub fn add_ext(&self, a: &RnsPoly, b: &RnsPoly) -> RnsPoly {
        RnsPoly {
            limbs: self
                .ext_tables()
                .zip(a.limbs.iter().zip(&b.limbs))
                .map(|(t, (x, y))| x.iter().zip(y).map(|(&u, &v)| t.modulus.add(u, v)).collect())
                .collect(),
        }
    }

    /// `z_j = x_j * (E/e_j)^{-1} mod e_j` and the centering correction `v`
    /// for one coefficient of an extended-basis polynomial.
    pub(crate) fn ext_digits(&self, a: &RnsPoly, c: usize, z: &mut [u64]) -> u64 {
        let mut frac = 0.0f64;
        for (j, t) in self.ext_tables().enumerate() {
            let m = &t.modulus;
            let (inv, inv_s) = self.e_hat_inv[j];
            z[j] = m.mul_shoup(a.limbs[j][c], inv, inv_s);
            frac += z[j] as f64 / m.value() as f64;
        }
        frac.round() as u64
    }
}

/// Big-integer helper: `floor(log2(x))` as a float with fractional part.
pub fn log2_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 64 {
        return (x.iter_u64_digits().next().unwrap() as f64).log2();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    (top.iter_u64_digits().next().unwrap() as f64).log2() + shift as f64
}

