//! Encryption, decryption and homomorphic operations.
//!
//! Ciphertexts are kept in coefficient form. Multiplication lifts both
//! operands to an auxiliary RNS basis, forms the tensor product exactly,
//! scales by `t/Q` with rounding and relinearizes with an RNS-digit gadget.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{CryptoRng, RngCore};

use crate::context::HeContext;
use crate::encoding::{Encoding, Plaintext};
use crate::error::{HeError, Result};
use crate::keys::{sample_cbd, sample_ternary, PublicKey, RelinKey, SecretKey};
use crate::ring::{log2_big, RnsPoly};

#[derive(Debug, Clone, PartialEq)]
pub struct HeCiphertext {
    pub(crate) param_id: u64,
    pub(crate) encoding: Encoding,
    pub(crate) polys: Vec<RnsPoly>,
    /// Heuristic `log2` of the scaled noise magnitude.
    pub(crate) noise_log2: f64,
    pub(crate) depth: u32,
}

impl HeCiphertext {
    pub fn param_id(&self) -> u64 {
        self.param_id
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn component_count(&self) -> usize {
        self.polys.len()
    }

    /// Multiplicative depth consumed so far.
    pub fn depth(&self) -> u32 {
        self.depth
    }
}

fn log2_sum(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (1.0 + (lo - hi).exp2()).log2()
}

/// Slack added to the multiplication estimate, fitted against measured
/// budgets at n = 4096 and 8192.
const MUL_SLACK_BITS: f64 = 6.0;

impl HeContext {
    fn check_key(&self, ring_id: u64) -> Result<()> {
        if ring_id != self.ring_id {
            return Err(HeError::ParamsMismatch);
        }
        Ok(())
    }

    fn check_ct(&self, c: &HeCiphertext) -> Result<()> {
        if c.param_id != self.param_id {
            return Err(HeError::ParamsMismatch);
        }
        if c.polys.len() != 2 {
            return Err(HeError::ComponentCount(c.polys.len()));
        }
        Ok(())
    }

    fn check_pair(&self, a: &HeCiphertext, b: &HeCiphertext) -> Result<()> {
        self.check_ct(a)?;
        self.check_ct(b)?;
        if a.encoding != b.encoding {
            return Err(HeError::EncodingMismatch);
        }
        Ok(())
    }

    /// Estimated remaining budget in bits for a ciphertext.
    pub fn estimated_budget(&self, c: &HeCiphertext) -> f64 {
        self.log2_q() - 1.0 - c.noise_log2
    }

    fn fresh_noise_log2(&self) -> f64 {
        let n = self.n() as f64;
        let t = self.t() as f64;
        let sigma = self.params.noise_stddev();
        (t * 6.0 * sigma * (4.0 * n / 3.0 + 1.0).sqrt() + t * t).log2()
    }

    fn relin_noise_log2(&self) -> f64 {
        let n = self.n() as f64;
        let sigma = self.params.noise_stddev();
        let w = self.params.relin_digit_bits;
        let digits: u32 = self.params.q_primes.iter().map(|q| (64 - q.leading_zeros()).div_ceil(w)).sum();
        (self.t() as f64).log2() + w as f64 + (6.0 * sigma * (digits as f64 * n).sqrt()).log2()
    }

    fn mul_noise_log2(&self, a: f64, b: f64) -> f64 {
        let n = self.n() as f64;
        let t = (self.t() as f64).log2();
        let tensor = a.max(b) + t + 0.5 * n.log2() + MUL_SLACK_BITS;
        log2_sum(tensor, self.relin_noise_log2())
    }

    /// Estimated budget left after `depth` sequential multiplications of
    /// fresh ciphertexts followed by a public scalar of `scalar_bits` bits.
    /// Used to reject computation plans before running them.
    pub fn projected_budget(&self, depth: u32, scalar_bits: f64) -> f64 {
        let fresh = self.fresh_noise_log2();
        let mut noise = fresh;
        for _ in 0..depth {
            noise = self.mul_noise_log2(noise, fresh);
        }
        self.log2_q() - 1.0 - noise - scalar_bits
    }

    /// `Delta * m` in `Q`, with `m` given by its coefficients in `[0, t)`.
    fn scaled_message(&self, pt: &Plaintext) -> RnsPoly {
        let ring = &self.ring;
        RnsPoly {
            limbs: ring
                .q
                .iter()
                .zip(&self.delta)
                .map(|(tb, &d)| {
                    let m = &tb.modulus;
                    let ds = m.shoup(d);
                    pt.coeffs.iter().map(|&c| m.mul_shoup(m.reduce(c), d, ds)).collect()
                })
                .collect(),
        }
    }

    pub fn encrypt_with_rng<R: RngCore + CryptoRng>(
        &self,
        pk: &PublicKey,
        pt: &Plaintext,
        rng: &mut R,
    ) -> Result<HeCiphertext> {
        self.check_key(pk.ring_id)?;
        if pt.param_id != self.param_id {
            return Err(HeError::ParamsMismatch);
        }
        let ring = &self.ring;
        let n = ring.n;
        let mut u = ring.from_signed(&sample_ternary(n, rng));
        ring.to_ntt(&mut u);
        let e1 = ring.from_signed(&sample_cbd(n, self.params.noise_eta, rng));
        let e2 = ring.from_signed(&sample_cbd(n, self.params.noise_eta, rng));
        let mut c0 = ring.mul_pointwise(&pk.p0, &u);
        let mut c1 = ring.mul_pointwise(&pk.p1, &u);
        ring.from_ntt(&mut c0);
        ring.from_ntt(&mut c1);
        let c0 = ring.add(&ring.add(&c0, &e1), &self.scaled_message(pt));
        let c1 = ring.add(&c1, &e2);
        Ok(HeCiphertext {
            param_id: self.param_id,
            encoding: pt.encoding,
            polys: vec![c0, c1],
            noise_log2: self.fresh_noise_log2(),
            depth: 0,
        })
    }

    /// Encrypts with an OS-seeded generator.
    pub fn encrypt(&self, pk: &PublicKey, pt: &Plaintext) -> Result<HeCiphertext> {
        self.encrypt_with_rng(pk, pt, &mut rand::rngs::OsRng)
    }

    /// `c0 + c1 * s` in coefficient form.
    fn phase(&self, sk: &SecretKey, c: &HeCiphertext) -> Result<RnsPoly> {
        self.check_key(sk.ring_id)?;
        self.check_ct(c)?;
        let ring = &self.ring;
        let mut c1 = c.polys[1].clone();
        ring.to_ntt(&mut c1);
        let mut x = ring.mul_pointwise(&c1, &sk.s);
        ring.from_ntt(&mut x);
        Ok(ring.add(&x, &c.polys[0]))
    }

    /// Budget in bits from the exact phase: `floor(log2(Q/2) - log2 max|t*x mod Q|)`.
    fn budget_of_phase(&self, x: &RnsPoly) -> i64 {
        let ring = &self.ring;
        let w = ring.mul_scalar(x, self.t() as i64);
        let half = &ring.q_big >> 1u32;
        let mut max = BigUint::zero();
        for j in 0..ring.n {
            let v = ring.compose(&w, j);
            let v = if v > half { &ring.q_big - v } else { v };
            if v > max {
                max = v;
            }
        }
        if max.is_zero() {
            return i64::MAX;
        }
        (self.log2_q() - 1.0 - log2_big(&max)).floor() as i64
    }

    /// Decrypts, or reports the failure signal when the noise has consumed
    /// the whole budget.
    pub fn decrypt(&self, sk: &SecretKey, c: &HeCiphertext) -> Result<Plaintext> {
        let x = self.phase(sk, c)?;
        let budget = self.budget_of_phase(&x);
        if budget <= 0 {
            return Err(HeError::DecryptionFailure { budget });
        }
        let ring = &self.ring;
        let t = BigUint::from(self.t());
        let half = &ring.q_big >> 1u32;
        let coeffs = (0..ring.n)
            .map(|j| {
                let v = (ring.compose(&x, j) * &t + &half) / &ring.q_big % &t;
                v.iter_u64_digits().next().unwrap_or(0)
            })
            .collect();
        Ok(Plaintext {
            coeffs,
            encoding: c.encoding,
            param_id: self.param_id,
        })
    }

    /// Exact remaining budget in bits; non-positive means decryption fails.
    pub fn noise_budget(&self, sk: &SecretKey, c: &HeCiphertext) -> Result<i64> {
        let x = self.phase(sk, c)?;
        Ok(self.budget_of_phase(&x).max(0))
    }

    pub fn he_add(&self, a: &HeCiphertext, b: &HeCiphertext) -> Result<HeCiphertext> {
        self.check_pair(a, b)?;
        let ring = &self.ring;
        Ok(HeCiphertext {
            param_id: self.param_id,
            encoding: a.encoding,
            polys: vec![ring.add(&a.polys[0], &b.polys[0]), ring.add(&a.polys[1], &b.polys[1])],
            noise_log2: log2_sum(a.noise_log2, b.noise_log2),
            depth: a.depth.max(b.depth),
        })
    }

    pub fn he_sub(&self, a: &HeCiphertext, b: &HeCiphertext) -> Result<HeCiphertext> {
        self.check_pair(a, b)?;
        let ring = &self.ring;
        Ok(HeCiphertext {
            param_id: self.param_id,
            encoding: a.encoding,
            polys: vec![ring.sub(&a.polys[0], &b.polys[0]), ring.sub(&a.polys[1], &b.polys[1])],
            noise_log2: log2_sum(a.noise_log2, b.noise_log2),
            depth: a.depth.max(b.depth),
        })
    }

    pub fn he_neg(&self, a: &HeCiphertext) -> Result<HeCiphertext> {
        self.check_ct(a)?;
        let ring = &self.ring;
        Ok(HeCiphertext {
            polys: a.polys.iter().map(|p| ring.neg(p)).collect(),
            ..a.clone()
        })
    }

    /// Adds a plaintext of the same encoding.
    pub fn he_add_plain(&self, a: &HeCiphertext, pt: &Plaintext) -> Result<HeCiphertext> {
        self.check_ct(a)?;
        self.check_plain(pt, a.encoding)?;
        let ring = &self.ring;
        let c0 = ring.add(&a.polys[0], &self.scaled_message(pt));
        Ok(HeCiphertext {
            polys: vec![c0, a.polys[1].clone()],
            noise_log2: log2_sum(a.noise_log2, 2.0 * (self.t() as f64).log2()),
            ..a.clone()
        })
    }

    /// Multiplies every coefficient by a public integer.
    pub fn he_mul_scalar(&self, a: &HeCiphertext, c: i64) -> Result<HeCiphertext> {
        self.check_ct(a)?;
        let t = self.t() as i64;
        let mut c = c.rem_euclid(t);
        if c > t / 2 {
            c -= t;
        }
        let ring = &self.ring;
        let grow = (c.unsigned_abs().max(1) as f64).log2();
        let out = HeCiphertext {
            polys: a.polys.iter().map(|p| ring.mul_scalar(p, c)).collect(),
            noise_log2: a.noise_log2 + grow,
            ..a.clone()
        };
        self.check_estimate(&out, "scalar multiplication")?;
        Ok(out)
    }

    /// Multiplies by a plaintext polynomial (slot-wise for batched data).
    pub fn he_mul_plain(&self, a: &HeCiphertext, pt: &Plaintext) -> Result<HeCiphertext> {
        self.check_ct(a)?;
        self.check_plain(pt, a.encoding)?;
        let ring = &self.ring;
        let centered = self.centered_plain(pt);
        let norm = centered.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0).max(1);
        let nonzero = centered.iter().filter(|&&c| c != 0).count().max(1);
        let mut m = ring.from_signed(&centered);
        ring.to_ntt(&mut m);
        let polys = a
            .polys
            .iter()
            .map(|p| {
                let mut p = p.clone();
                ring.to_ntt(&mut p);
                let mut r = ring.mul_pointwise(&p, &m);
                ring.from_ntt(&mut r);
                r
            })
            .collect();
        let out = HeCiphertext {
            polys,
            noise_log2: a.noise_log2 + (norm as f64).log2() + 0.5 * (nonzero as f64).log2() + 1.0,
            ..a.clone()
        };
        self.check_estimate(&out, "plaintext multiplication")?;
        Ok(out)
    }

    fn check_estimate(&self, c: &HeCiphertext, operation: &'static str) -> Result<()> {
        let estimate = self.estimated_budget(c);
        if estimate <= 0.0 {
            return Err(HeError::BudgetExhausted { operation, estimate });
        }
        Ok(())
    }

    /// Ciphertext product, relinearized back to two components.
    pub fn he_mul(&self, a: &HeCiphertext, b: &HeCiphertext, rk: &RelinKey) -> Result<HeCiphertext> {
        self.check_pair(a, b)?;
        self.check_key(rk.ring_id)?;
        let noise_log2 = self.mul_noise_log2(a.noise_log2, b.noise_log2);
        let estimate = self.log2_q() - 1.0 - noise_log2;
        if estimate <= 0.0 {
            return Err(HeError::BudgetExhausted {
                operation: "multiplication",
                estimate,
            });
        }
        let ring = &self.ring;
        let lift = |p: &RnsPoly| {
            let mut e = ring.extend(p);
            ring.to_ntt_ext(&mut e);
            e
        };
        let (a0, a1) = (lift(&a.polys[0]), lift(&a.polys[1]));
        let (b0, b1) = (lift(&b.polys[0]), lift(&b.polys[1]));
        let mut d = [
            ring.mul_pointwise_ext(&a0, &b0),
            ring.add_ext(&ring.mul_pointwise_ext(&a0, &b1), &ring.mul_pointwise_ext(&a1, &b0)),
            ring.mul_pointwise_ext(&a1, &b1),
        ];
        for x in &mut d {
            ring.from_ntt_ext(x);
        }
        let [d0, d1, d2] = d.map(|x| self.scale_round(&x));
        let (c0, c1) = self.relinearize(d0, d1, &d2, rk);
        Ok(HeCiphertext {
            param_id: self.param_id,
            encoding: a.encoding,
            polys: vec![c0, c1],
            noise_log2,
            depth: a.depth.max(b.depth) + 1,
        })
    }

    /// `round(t * X / Q) mod Q` for an extended-basis polynomial holding
    /// the centered integer `X`.
    fn scale_round(&self, x: &RnsPoly) -> RnsPoly {
        let ring = &self.ring;
        let k = ring.q.len();
        let e = k + ring.p.len();
        let mut out = RnsPoly::zero(ring.n, k);
        let mut z = vec![0u64; e];
        for c in 0..ring.n {
            let v = ring.ext_digits(x, c, &mut z);
            let mut frac = 0.0f64;
            let mut carry_sum: u128 = 0;
            for j in 0..k {
                let m = &ring.q[j].modulus;
                let (quot, rem) = m.div_rem_u128(z[j] as u128 * self.sr_rem[j] as u128);
                carry_sum += quot;
                frac += rem as f64 / m.value() as f64;
            }
            let rounded = frac.round() as u128;
            for i in 0..k {
                let m = &ring.q[i].modulus;
                let mut acc = carry_sum + rounded;
                for j in 0..k {
                    acc += z[j] as u128 * self.sr_q[i][j] as u128;
                }
                for j in 0..ring.p.len() {
                    acc += z[k + j] as u128 * self.sr_p[i][j] as u128;
                }
                let r = m.reduce_u128(acc);
                out.limbs[i][c] = m.sub(r, m.mul(v % m.value(), self.sr_tp[i]));
            }
        }
        out
    }

    fn relinearize(&self, d0: RnsPoly, d1: RnsPoly, d2: &RnsPoly, rk: &RelinKey) -> (RnsPoly, RnsPoly) {
        let ring = &self.ring;
        let k = ring.q.len();
        let w = rk.digit_bits;
        let mask = if w >= 64 { u64::MAX } else { (1u64 << w) - 1 };
        let mut acc0 = RnsPoly::zero(ring.n, k);
        let mut acc1 = RnsPoly::zero(ring.n, k);
        for i in 0..k {
            for digit in 0..rk.digits_per_prime {
                let shift = w as usize * digit;
                let raw: Vec<u64> = d2.limbs[i]
                    .iter()
                    .map(|&x| if shift >= 64 { 0 } else { (x >> shift) & mask })
                    .collect();
                let mut dp = RnsPoly {
                    limbs: ring.q.iter().map(|t| raw.iter().map(|&x| t.modulus.reduce(x)).collect()).collect(),
                };
                ring.to_ntt(&mut dp);
                let (b, a) = &rk.keys[i * rk.digits_per_prime + digit];
                ring.mul_acc(&mut acc0, &dp, b);
                ring.mul_acc(&mut acc1, &dp, a);
            }
        }
        ring.from_ntt(&mut acc0);
        ring.from_ntt(&mut acc1);
        (ring.add(&d0, &acc0), ring.add(&d1, &acc1))
    }
}
