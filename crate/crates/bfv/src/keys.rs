//! Key generation. Keys depend only on the ring, so one key set serves
//! every plaintext modulus over that ring.

use rand::{CryptoRng, Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::context::HeContext;
use crate::ring::{Ring, RnsPoly};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey {
    pub(crate) ring_id: u64,
    /// Ternary secret in NTT form.
    pub(crate) s: RnsPoly,
}

/// `(-(a*s + e), a)` in NTT form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub(crate) ring_id: u64,
    pub(crate) p0: RnsPoly,
    pub(crate) p1: RnsPoly,
}

/// Key-switching keys for `s^2 -> s`, one pair per (prime, digit), in
/// NTT form. Pair `(i, k)` encrypts `2^{wk} e_i s^2` where `e_i` is the CRT
/// basis element for prime `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelinKey {
    pub(crate) ring_id: u64,
    pub(crate) digit_bits: u32,
    pub(crate) digits_per_prime: usize,
    pub(crate) keys: Vec<(RnsPoly, RnsPoly)>,
}

impl SecretKey {
    pub fn ring_id(&self) -> u64 {
        self.ring_id
    }
}

impl PublicKey {
    pub fn ring_id(&self) -> u64 {
        self.ring_id
    }
}

impl RelinKey {
    pub fn ring_id(&self) -> u64 {
        self.ring_id
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

pub(crate) fn sample_ternary<R: RngCore>(n: usize, rng: &mut R) -> Vec<i64> {
    (0..n).map(|_| rng.gen_range(-1i64..=1)).collect()
}

/// Centered binomial with parameter `eta` (at most 32).
pub(crate) fn sample_cbd<R: RngCore>(n: usize, eta: u32, rng: &mut R) -> Vec<i64> {
    let mask = if eta >= 32 { u32::MAX } else { (1u32 << eta) - 1 };
    (0..n)
        .map(|_| {
            let x = rng.next_u64();
            let a = (x as u32 & mask).count_ones() as i64;
            let b = ((x >> 32) as u32 & mask).count_ones() as i64;
            a - b
        })
        .collect()
}

/// Uniform polynomial, sampled directly per prime (already in NTT form
/// since the transform is a bijection).
pub(crate) fn sample_uniform<R: RngCore>(ring: &Ring, rng: &mut R) -> RnsPoly {
    RnsPoly {
        limbs: ring
            .q
            .iter()
            .map(|t| (0..ring.n).map(|_| rng.gen_range(0..t.modulus.value())).collect())
            .collect(),
    }
}

fn ntt_of(ring: &Ring, coeffs: &[i64]) -> RnsPoly {
    let mut p = ring.from_signed(coeffs);
    ring.to_ntt(&mut p);
    p
}

/// `(-(a*s + e), a)` in NTT form for fresh `a`, `e`.
fn rlwe_sample<R: RngCore>(ctx: &HeContext, s: &RnsPoly, rng: &mut R) -> (RnsPoly, RnsPoly) {
    let ring = &ctx.ring;
    let a = sample_uniform(ring, rng);
    let e = ntt_of(ring, &sample_cbd(ring.n, ctx.params.noise_eta, rng));
    let b = ring.neg(&ring.add(&ring.mul_pointwise(&a, s), &e));
    (b, a)
}

pub fn keygen<R: RngCore + CryptoRng>(ctx: &HeContext, rng: &mut R) -> (SecretKey, PublicKey, RelinKey) {
    let ring = &ctx.ring;
    let s = ntt_of(ring, &sample_ternary(ring.n, rng));
    let (p0, p1) = rlwe_sample(ctx, &s, rng);

    let w = ctx.params.relin_digit_bits;
    let max_bits = ring.q.iter().map(|t| 64 - t.modulus.value().leading_zeros()).max().unwrap_or(0);
    let digits = max_bits.div_ceil(w) as usize;
    let s2 = ring.mul_pointwise(&s, &s);
    let mut keys = Vec::with_capacity(ring.q.len() * digits);
    for i in 0..ring.q.len() {
        let m = &ring.q[i].modulus;
        for k in 0..digits {
            let (mut b, a) = rlwe_sample(ctx, &s, rng);
            let g = m.pow(2 % m.value(), (w as u64) * k as u64);
            for (x, &y) in b.limbs[i].iter_mut().zip(&s2.limbs[i]) {
                *x = m.add(*x, m.mul(g, y));
            }
            keys.push((b, a));
        }
    }
    let id = ctx.ring_id;
    (
        SecretKey { ring_id: id, s },
        PublicKey { ring_id: id, p0, p1 },
        RelinKey {
            ring_id: id,
            digit_bits: w,
            digits_per_prime: digits,
            keys,
        },
    )
}

/// Deterministic key generation from a 64-bit seed.
pub fn keygen_seeded(ctx: &HeContext, seed: u64) -> (SecretKey, PublicKey, RelinKey) {
    keygen(ctx, &mut ChaCha20Rng::seed_from_u64(seed))
}
