//! The LD rule as a BFV computation.
//!
//! Both sides of the integer rule can exceed any single batching-friendly
//! plaintext modulus, so the plan runs the same circuit under several
//! plaintext primes over one ring (one key set) and the decryptor
//! recombines the residues by CRT before comparing.

use dmsc_bfv::{crt_combine, Encoding, HeCiphertext, HeContext, PublicKey, RelinKey, SecretKey, PLAIN_PRIMES};
use rand::{CryptoRng, RngCore};

use crate::error::{AnalyticsError, Result};
use crate::ld::{HaplotypeCounts, LdThreshold};

/// Minimum estimated budget, in bits, a plan must leave.
const PLAN_MARGIN_BITS: f64 = 2.0;

/// Encrypted `n_AB, n_Ab, n_aB, n_ab` under one plaintext modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct EncryptedCounts {
    pub parts: [HeCiphertext; 4],
}

/// One listing: encrypted counts under every modulus of the plan.
#[derive(Debug, Clone, PartialEq)]
pub struct LdHeListing {
    pub per_modulus: Vec<EncryptedCounts>,
}

/// Encrypted `(lhs, rhs)` under every modulus of the plan.
#[derive(Debug, Clone, PartialEq)]
pub struct LdHeOutput {
    pub per_modulus: Vec<(HeCiphertext, HeCiphertext)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LdHeDecision {
    pub lhs: u128,
    pub rhs: u128,
    pub decision: bool,
}

#[derive(Debug, Clone)]
pub struct LdHePlan {
    pub threshold: LdThreshold,
    pub max_total: u64,
    pub encoding: Encoding,
    contexts: Vec<HeContext>,
}

/// Upper bounds on `lhs` and `rhs` for populations of at most `n` haplotypes.
pub fn ld_value_bounds(n: u64, threshold: LdThreshold) -> (u128, u128) {
    let n = n as u128;
    // |N n_AB - N_A N_B| <= N^2 / 4 and N_A N_a, N_B N_b <= N^2 / 4.
    let quarter = n * n / 4;
    let lhs = 2 * n * quarter * quarter * threshold.den as u128;
    let rhs = threshold.num as u128 * quarter * quarter;
    (lhs, rhs)
}

impl LdHePlan {
    /// Chooses enough plaintext primes to hold both sides exactly and
    /// checks the noise budget for depth three.
    pub fn new(base: &HeContext, threshold: LdThreshold, max_total: u64, encoding: Encoding) -> Result<Self> {
        if max_total == 0 {
            return Err(AnalyticsError::PlanRejected("population bound must be positive".into()));
        }
        let (lhs, rhs) = ld_value_bounds(max_total, threshold);
        let need = (lhs.max(rhs) as f64 + 1.0).log2();
        let mut contexts = Vec::new();
        let mut have = 0.0;
        for &t in PLAIN_PRIMES.iter() {
            if have > need {
                break;
            }
            let Ok(ctx) = base.with_plain_modulus(t) else { continue };
            if encoding == Encoding::Batched && !ctx.params().supports_batching() {
                continue;
            }
            have += (t as f64).log2();
            contexts.push(ctx);
        }
        if have <= need {
            return Err(AnalyticsError::PlanRejected(format!(
                "values need {need:.1} bits but the available plaintext primes give {have:.1}"
            )));
        }
        let scalar_bits = ((2 * threshold.den).max(threshold.num).max(1) as f64).log2();
        for ctx in &contexts {
            let budget = ctx.projected_budget(3, scalar_bits);
            if budget < PLAN_MARGIN_BITS {
                return Err(AnalyticsError::PlanRejected(format!(
                    "estimated noise budget {budget:.1} bits at depth 3 under t = {}",
                    ctx.t()
                )));
            }
        }
        Ok(Self {
            threshold,
            max_total,
            encoding,
            contexts,
        })
    }

    pub fn contexts(&self) -> &[HeContext] {
        &self.contexts
    }

    pub fn plain_moduli(&self) -> Vec<u64> {
        self.contexts.iter().map(|c| c.t()).collect()
    }

    /// Instances one listing can hold.
    pub fn capacity(&self) -> usize {
        match self.encoding {
            Encoding::Scalar => 1,
            Encoding::Batched => self.contexts[0].n(),
        }
    }

    /// Encrypts one maker's counts, one instance per slot.
    pub fn encrypt_counts<R: RngCore + CryptoRng>(
        &self,
        pk: &PublicKey,
        counts: &[HaplotypeCounts],
        rng: &mut R,
    ) -> Result<LdHeListing> {
        if counts.is_empty() || counts.len() > self.capacity() {
            return Err(AnalyticsError::DimensionMismatch {
                expected: self.capacity(),
                got: counts.len(),
            });
        }
        let mut per_modulus = Vec::with_capacity(self.contexts.len());
        for ctx in &self.contexts {
            let mut parts = Vec::with_capacity(4);
            for k in 0..4 {
                let values: Vec<u64> = counts.iter().map(|c| c.as_array()[k]).collect();
                let pt = match self.encoding {
                    Encoding::Scalar => ctx.encode_scalar(values[0] as i64),
                    Encoding::Batched => ctx.batch_encode(&values)?,
                };
                parts.push(ctx.encrypt_with_rng(pk, &pt, rng)?);
            }
            let parts: [HeCiphertext; 4] = parts.try_into().expect("four parts");
            per_modulus.push(EncryptedCounts { parts });
        }
        Ok(LdHeListing { per_modulus })
    }

    /// Sums makers' listings slot-wise.
    pub fn aggregate(&self, listings: &[LdHeListing]) -> Result<LdHeListing> {
        let (first, rest) = listings
            .split_first()
            .ok_or(AnalyticsError::DimensionMismatch { expected: 1, got: 0 })?;
        let mut acc = first.clone();
        for l in rest {
            self.check_shape(l)?;
            for (ctx, (a, b)) in self.contexts.iter().zip(acc.per_modulus.iter_mut().zip(&l.per_modulus)) {
                for k in 0..4 {
                    a.parts[k] = ctx.he_add(&a.parts[k], &b.parts[k])?;
                }
            }
        }
        Ok(acc)
    }

    fn check_shape(&self, l: &LdHeListing) -> Result<()> {
        if l.per_modulus.len() != self.contexts.len() {
            return Err(AnalyticsError::DimensionMismatch {
                expected: self.contexts.len(),
                got: l.per_modulus.len(),
            });
        }
        Ok(())
    }

    /// Homomorphic evaluation of both sides of the rule. Depth three.
    #[allow(non_snake_case)]
    pub fn evaluate(&self, rk: &RelinKey, listing: &LdHeListing) -> Result<LdHeOutput> {
        self.check_shape(listing)?;
        let mut per_modulus = Vec::with_capacity(self.contexts.len());
        for (ctx, enc) in self.contexts.iter().zip(&listing.per_modulus) {
            let [n_AB, n_Ab, n_aB, n_ab] = &enc.parts;
            let N_A = ctx.he_add(n_AB, n_Ab)?;
            let N_a = ctx.he_add(n_aB, n_ab)?;
            let N_B = ctx.he_add(n_AB, n_aB)?;
            let N_b = ctx.he_add(n_Ab, n_ab)?;
            let n = ctx.he_add(&N_A, &N_a)?;

            let t1 = ctx.he_mul(&n, n_AB, rk)?;
            let t2 = ctx.he_mul(&N_A, &N_B, rk)?;
            let diff = ctx.he_sub(&t1, &t2)?;
            let sq = ctx.he_mul(&diff, &diff, rk)?;
            let sq_n = ctx.he_mul(&sq, &n, rk)?;
            let lhs = ctx.he_mul_scalar(&sq_n, scalar_mod(2 * self.threshold.den, ctx.t()))?;

            let p1 = ctx.he_mul(&N_A, &N_a, rk)?;
            let p2 = ctx.he_mul(&N_B, &N_b, rk)?;
            let p = ctx.he_mul(&p1, &p2, rk)?;
            let rhs = ctx.he_mul_scalar(&p, scalar_mod(self.threshold.num, ctx.t()))?;
            per_modulus.push((lhs, rhs));
        }
        Ok(LdHeOutput { per_modulus })
    }

    /// Decrypts both sides, recombines them across moduli and compares.
    /// Returns the first `m` instances.
    pub fn decrypt_decide(&self, sk: &SecretKey, out: &LdHeOutput, m: usize) -> Result<Vec<LdHeDecision>> {
        self.check_output_len(out.per_modulus.len())?;
        let mut residues = Vec::with_capacity(self.contexts.len());
        for (ctx, (lhs, rhs)) in self.contexts.iter().zip(&out.per_modulus) {
            let mut pair = Vec::with_capacity(2);
            for ct in [lhs, rhs] {
                let pt = ctx.decrypt(sk, ct)?;
                pair.push(match self.encoding {
                    Encoding::Scalar => vec![pt.constant()],
                    Encoding::Batched => ctx.batch_decode(&pt)?,
                });
            }
            let rhs = pair.pop().unwrap();
            residues.push((pair.pop().unwrap(), rhs));
        }
        self.decide(&residues, m)
    }

    /// Recombines decrypted residues, one `(lhs, rhs)` slot vector pair per
    /// plaintext modulus in plan order, and compares the first `m` slots.
    pub fn decide(&self, residues: &[(Vec<u64>, Vec<u64>)], m: usize) -> Result<Vec<LdHeDecision>> {
        self.check_output_len(residues.len())?;
        if m == 0 || m > self.capacity() || residues.iter().any(|(l, r)| l.len() < m || r.len() < m) {
            return Err(AnalyticsError::DimensionMismatch {
                expected: self.capacity(),
                got: m,
            });
        }
        let combine = |side: &dyn Fn(&(Vec<u64>, Vec<u64>)) -> u64| {
            let parts: Vec<(u64, u64)> = residues.iter().zip(&self.contexts).map(|(r, c)| (side(r), c.t())).collect();
            crt_combine(&parts).ok_or_else(|| AnalyticsError::PlanRejected("CRT overflow".into()))
        };
        (0..m)
            .map(|i| {
                let lhs = combine(&|r| r.0[i])?;
                let rhs = combine(&|r| r.1[i])?;
                Ok(LdHeDecision {
                    lhs,
                    rhs,
                    decision: lhs > rhs,
                })
            })
            .collect()
    }

    fn check_output_len(&self, got: usize) -> Result<()> {
        if got != self.contexts.len() {
            return Err(AnalyticsError::DimensionMismatch {
                expected: self.contexts.len(),
                got,
            });
        }
        Ok(())
    }
}

fn scalar_mod(c: u64, t: u64) -> i64 {
    (c % t) as i64
}

/// Checks that every count vector respects the plan's population bound.
pub fn check_population(plan: &LdHePlan, counts: &[HaplotypeCounts]) -> Result<()> {
    if let Some(c) = counts.iter().find(|c| c.total() > plan.max_total) {
        return Err(AnalyticsError::PlanRejected(format!(
            "population {} exceeds the plan bound {}",
            c.total(),
            plan.max_total
        )));
    }
    Ok(())
}
