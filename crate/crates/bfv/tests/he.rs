use std::sync::OnceLock;

use dmsc_bfv::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

struct Fixture {
    ctx: HeContext,
    sk: SecretKey,
    pk: PublicKey,
    rk: RelinKey,
}

fn fixture(n: usize) -> &'static Fixture {
    static F4096: OnceLock<Fixture> = OnceLock::new();
    static F8192: OnceLock<Fixture> = OnceLock::new();
    let cell = if n == 4096 { &F4096 } else { &F8192 };
    cell.get_or_init(|| {
        let ctx = HeContext::new(HeParams::preset(n).unwrap()).unwrap();
        let (sk, pk, rk) = keygen_seeded(&ctx, 42);
        Fixture { ctx, sk, pk, rk }
    })
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

impl Fixture {
    fn enc(&self, v: i64, r: &mut ChaCha20Rng) -> HeCiphertext {
        self.ctx.encrypt_with_rng(&self.pk, &self.ctx.encode_scalar(v), r).unwrap()
    }

    fn dec(&self, c: &HeCiphertext) -> i64 {
        self.ctx.decode_scalar(&self.ctx.decrypt(&self.sk, c).unwrap()).unwrap()
    }

    fn enc_batch(&self, v: &[u64], r: &mut ChaCha20Rng) -> HeCiphertext {
        self.ctx.encrypt_with_rng(&self.pk, &self.ctx.batch_encode(v).unwrap(), r).unwrap()
    }

    fn dec_batch(&self, c: &HeCiphertext) -> Vec<u64> {
        self.ctx.batch_decode(&self.ctx.decrypt(&self.sk, c).unwrap()).unwrap()
    }
}

#[test]
fn zero_and_small_values_round_trip() {
    let f = fixture(4096);
    let mut r = rng(1);
    assert_eq!(f.dec(&f.enc(0, &mut r)), 0);
    assert_eq!(f.dec(&f.enc(5, &mut r)), 5);
    assert_eq!(f.dec(&f.enc(-5, &mut r)), -5);
}

#[test]
fn random_messages_round_trip() {
    let f = fixture(4096);
    let mut r = rng(2);
    let t = f.ctx.t();
    for _ in 0..100 {
        let m = r.gen_range(0..t);
        let c = f.enc(m as i64, &mut r);
        assert_eq!(f.ctx.decrypt(&f.sk, &c).unwrap().constant(), m);
    }
}

#[test]
fn keygen_is_deterministic_per_seed() {
    let ctx = HeContext::new(HeParams::n4096()).unwrap();
    let (sk1, pk1, rk1) = keygen_seeded(&ctx, 9);
    let (sk2, pk2, rk2) = keygen_seeded(&ctx, 9);
    assert_eq!(sk1, sk2);
    assert_eq!(pk1, pk2);
    assert_eq!(rk1, rk2);
    let (sk3, _, _) = keygen_seeded(&ctx, 10);
    assert_ne!(sk1, sk3);
}

#[test]
fn encryption_is_randomized() {
    let f = fixture(4096);
    let mut r = rng(3);
    let a = f.enc(77, &mut r);
    let b = f.enc(77, &mut r);
    assert_ne!(a, b);
    assert_eq!(f.dec(&a), f.dec(&b));
    let c = f.ctx.encrypt(&f.pk, &f.ctx.encode_scalar(77)).unwrap();
    assert_eq!(f.dec(&c), 77);
}

#[test]
fn small_arithmetic_examples() {
    let f = fixture(4096);
    let mut r = rng(4);
    let (c3, c4, c5) = (f.enc(3, &mut r), f.enc(4, &mut r), f.enc(5, &mut r));
    assert_eq!(f.dec(&f.ctx.he_add(&c3, &c4).unwrap()), 7);
    assert_eq!(f.dec(&f.ctx.he_sub(&c3, &c4).unwrap()), -1);
    assert_eq!(f.dec(&f.ctx.he_mul(&c3, &c5, &f.rk).unwrap()), 15);
    let m = 12345;
    let cm = f.enc(m, &mut r);
    assert_eq!(f.dec(&f.ctx.he_add(&cm, &f.enc(0, &mut r)).unwrap()), m);
    assert_eq!(f.dec(&f.ctx.he_mul(&cm, &f.enc(1, &mut r), &f.rk).unwrap()), m);
    assert_eq!(f.dec(&f.ctx.he_mul_scalar(&cm, -3).unwrap()), (-3 * m).rem_euclid(65537));
    assert_eq!(f.dec(&f.ctx.he_add_plain(&c3, &f.ctx.encode_scalar(10)).unwrap()), 13);
    assert_eq!(f.dec(&f.ctx.he_mul_plain(&c5, &f.ctx.encode_scalar(-2)).unwrap()), -10);
    assert_eq!(f.dec(&f.ctx.he_neg(&c5).unwrap()), -5);
}

#[test]
fn sum_of_hundred_encrypted_ones() {
    let f = fixture(4096);
    let mut r = rng(5);
    let mut acc = f.enc(1, &mut r);
    for _ in 1..100 {
        acc = f.ctx.he_add(&acc, &f.enc(1, &mut r)).unwrap();
    }
    assert_eq!(f.dec(&acc), 100);
}

/// 1000 random pairs per degree, packed into slots, checked against native
/// modular arithmetic.
fn homomorphism_pairs(n: usize, seed: u64) {
    let f = fixture(n);
    let mut r = rng(seed);
    let t = f.ctx.t();
    let a: Vec<u64> = (0..1000).map(|_| r.gen_range(0..t)).collect();
    let b: Vec<u64> = (0..1000).map(|_| r.gen_range(0..t)).collect();
    let (ca, cb) = (f.enc_batch(&a, &mut r), f.enc_batch(&b, &mut r));
    let sum = f.dec_batch(&f.ctx.he_add(&ca, &cb).unwrap());
    let prod = f.dec_batch(&f.ctx.he_mul(&ca, &cb, &f.rk).unwrap());
    for i in 0..1000 {
        assert_eq!(sum[i], (a[i] + b[i]) % t, "sum slot {i}");
        assert_eq!(prod[i], a[i] * b[i] % t, "product slot {i}");
    }
    assert!(sum[1000..].iter().chain(&prod[1000..]).all(|&x| x == 0));
}

#[test]
fn thousand_pair_homomorphism_n4096() {
    homomorphism_pairs(4096, 6);
}

#[test]
fn thousand_pair_homomorphism_n8192() {
    homomorphism_pairs(8192, 7);
}

#[test]
fn scalar_pairs_match_native() {
    let f = fixture(4096);
    let mut r = rng(8);
    let t = f.ctx.t();
    for _ in 0..20 {
        let (a, b) = (r.gen_range(0..t), r.gen_range(0..t));
        let (ca, cb) = (f.enc(a as i64, &mut r), f.enc(b as i64, &mut r));
        let s = f.ctx.decrypt(&f.sk, &f.ctx.he_add(&ca, &cb).unwrap()).unwrap();
        let p = f.ctx.decrypt(&f.sk, &f.ctx.he_mul(&ca, &cb, &f.rk).unwrap()).unwrap();
        assert_eq!(s.constant(), (a + b) % t);
        assert_eq!(p.constant(), a * b % t);
        assert!(p.coeffs()[1..].iter().all(|&x| x == 0));
    }
}

#[test]
fn depth_three_chain_at_n8192() {
    let f = fixture(8192);
    let mut r = rng(9);
    let t = f.ctx.t();
    let v: Vec<u64> = (0..4).map(|_| r.gen_range(1..t)).collect();
    let c: Vec<HeCiphertext> = v.iter().map(|&x| f.enc(x as i64, &mut r)).collect();
    let ab = f.ctx.he_mul(&c[0], &c[1], &f.rk).unwrap();
    let abc = f.ctx.he_mul(&ab, &c[2], &f.rk).unwrap();
    let abcd = f.ctx.he_mul(&abc, &c[3], &f.rk).unwrap();
    let expect = v.iter().fold(1u128, |acc, &x| acc * x as u128 % t as u128) as u64;
    assert_eq!(abcd.depth(), 3);
    assert_eq!(f.ctx.decrypt(&f.sk, &abcd).unwrap().constant(), expect);
    assert!(f.ctx.noise_budget(&f.sk, &abcd).unwrap() > 0);
}

#[test]
fn budget_strictly_decreases_under_multiplication() {
    let f = fixture(4096);
    let mut r = rng(10);
    let (a, b) = (f.enc(11, &mut r), f.enc(13, &mut r));
    let ba = f.ctx.noise_budget(&f.sk, &a).unwrap();
    let bb = f.ctx.noise_budget(&f.sk, &b).unwrap();
    assert!(ba > 0 && bb > 0);
    let ab = f.ctx.he_mul(&a, &b, &f.rk).unwrap();
    assert!(f.ctx.noise_budget(&f.sk, &ab).unwrap() < ba.min(bb));
    let sum = f.ctx.he_add(&a, &b).unwrap();
    assert!(f.ctx.noise_budget(&f.sk, &sum).unwrap() >= ba.min(bb) - 1);
}

#[test]
fn depth_sweep_is_roughly_linear() {
    let f = fixture(8192);
    let mut r = rng(11);
    let mut c = f.enc(2, &mut r);
    let mut budgets = vec![f.ctx.noise_budget(&f.sk, &c).unwrap()];
    for _ in 0..4 {
        c = f.ctx.he_mul(&c, &f.enc(3, &mut r), &f.rk).unwrap();
        budgets.push(f.ctx.noise_budget(&f.sk, &c).unwrap());
    }
    println!("budget by depth: {budgets:?}");
    let drops: Vec<i64> = budgets.windows(2).map(|w| w[0] - w[1]).collect();
    for d in &drops {
        assert!((20..=40).contains(d), "{drops:?}");
    }
    assert_eq!(f.dec(&c), 2 * 81);
}

#[test]
fn estimated_budget_is_conservative() {
    let f = fixture(8192);
    let mut r = rng(12);
    let mut c = f.enc(5, &mut r);
    loop {
        let exact = f.ctx.noise_budget(&f.sk, &c).unwrap() as f64;
        assert!(f.ctx.estimated_budget(&c) <= exact + 1.0);
        match f.ctx.he_mul(&c, &f.enc(5, &mut r), &f.rk) {
            Ok(next) => c = next,
            Err(HeError::BudgetExhausted { .. }) => break,
            Err(e) => panic!("{e}"),
        }
    }
    assert!(c.depth() >= 3);
}

#[test]
fn multiplication_chain_is_flagged_eagerly() {
    let f = fixture(4096);
    let mut r = rng(13);
    let mut c = f.enc(3, &mut r);
    let mut flagged = false;
    for _ in 0..10 {
        match f.ctx.he_mul(&c, &c, &f.rk) {
            Ok(next) => c = next,
            Err(HeError::BudgetExhausted { estimate, .. }) => {
                assert!(estimate <= 0.0);
                flagged = true;
                break;
            }
            Err(e) => panic!("{e}"),
        }
    }
    assert!(flagged);
}

#[test]
fn overgrown_noise_reports_decryption_failure() {
    let f = fixture(4096);
    let mut r = rng(14);
    let mut c = f.enc(1, &mut r);
    let mut value: u64 = 1;
    let t = f.ctx.t();
    let mut failed = false;
    for _ in 0..200 {
        c = f.ctx.he_add(&c, &c).unwrap();
        value = value * 2 % t;
        match f.ctx.decrypt(&f.sk, &c) {
            Ok(pt) => {
                let budget = f.ctx.noise_budget(&f.sk, &c).unwrap();
                assert!(budget > 0);
                if budget >= 2 {
                    assert_eq!(pt.constant(), value);
                }
            }
            Err(HeError::DecryptionFailure { budget }) => {
                assert!(budget <= 0);
                assert_eq!(f.ctx.noise_budget(&f.sk, &c).unwrap(), 0);
                failed = true;
                break;
            }
            Err(e) => panic!("{e}"),
        }
    }
    assert!(failed);
}

#[test]
fn foreign_key_decryption_fails() {
    let f = fixture(4096);
    let (other_sk, _, _) = keygen_seeded(&f.ctx, 1234);
    let c = f.enc(9, &mut rng(15));
    assert!(matches!(f.ctx.decrypt(&other_sk, &c), Err(HeError::DecryptionFailure { .. })));
}

#[test]
fn batch_encoding_round_trips() {
    let f = fixture(4096);
    let v: Vec<u64> = (1..=16).collect();
    let pt = f.ctx.batch_encode(&v).unwrap();
    assert_eq!(&f.ctx.batch_decode(&pt).unwrap()[..16], &v[..]);
    let full: Vec<u64> = (1..=4096).collect();
    assert_eq!(f.dec_batch(&f.enc_batch(&full, &mut rng(16))), full);
    assert!(matches!(f.ctx.batch_encode(&vec![0; 4097]), Err(HeError::TooManySlots { .. })));
}

#[test]
fn slot_wise_product_matches_native() {
    let f = fixture(4096);
    let mut r = rng(17);
    let t = f.ctx.t();
    let a: Vec<u64> = (0..4096).map(|_| r.gen_range(0..t)).collect();
    let b: Vec<u64> = (0..4096).map(|_| r.gen_range(0..t)).collect();
    let prod = f.dec_batch(&f.ctx.he_mul(&f.enc_batch(&a, &mut r), &f.enc_batch(&b, &mut r), &f.rk).unwrap());
    let plain = f.dec_batch(&f.ctx.he_mul_plain(&f.enc_batch(&a, &mut r), &f.ctx.batch_encode(&b).unwrap()).unwrap());
    for i in 0..4096 {
        assert_eq!(prod[i], a[i] * b[i] % t);
        assert_eq!(plain[i], a[i] * b[i] % t);
    }
}

#[test]
fn slot_zero_agrees_with_scalar_encoding() {
    let f = fixture(4096);
    let mut r = rng(18);
    let (x, y, z) = (1234i64, 567i64, 89i64);
    let scalar = {
        let xy = f.ctx.he_mul(&f.enc(x, &mut r), &f.enc(y, &mut r), &f.rk).unwrap();
        f.ctx.decrypt(&f.sk, &f.ctx.he_add(&xy, &f.enc(z, &mut r)).unwrap()).unwrap().constant()
    };
    let batched = {
        let xy = f
            .ctx
            .he_mul(&f.enc_batch(&[x as u64], &mut r), &f.enc_batch(&[y as u64], &mut r), &f.rk)
            .unwrap();
        f.dec_batch(&f.ctx.he_add(&xy, &f.enc_batch(&[z as u64], &mut r)).unwrap())[0]
    };
    assert_eq!(scalar, batched);
    assert_eq!(scalar, ((x * y + z) % 65537) as u64);
}

#[test]
fn mixed_encodings_are_rejected() {
    let f = fixture(4096);
    let mut r = rng(19);
    let a = f.enc(1, &mut r);
    let b = f.enc_batch(&[1], &mut r);
    assert_eq!(f.ctx.he_add(&a, &b), Err(HeError::EncodingMismatch));
    assert_eq!(f.ctx.he_mul(&a, &b, &f.rk), Err(HeError::EncodingMismatch));
}

#[test]
fn batching_requires_compatible_plain_modulus() {
    let ctx = HeContext::new(HeParams::n4096().with_plain_modulus(1 << 20).unwrap()).unwrap();
    assert!(matches!(ctx.batch_encode(&[1]), Err(HeError::BatchingUnsupported { .. })));
    let (sk, pk, _) = keygen_seeded(&ctx, 1);
    let c = ctx.encrypt(&pk, &ctx.encode_scalar(1 << 19)).unwrap();
    assert_eq!(ctx.decrypt(&sk, &c).unwrap().constant(), 1 << 19);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(HeParams::new(3000, PRIMES_60[..2].to_vec(), 65537).is_err());
    assert!(HeParams::new(4096, vec![], 65537).is_err());
    assert!(HeParams::new(4096, vec![PRIMES_54[0]], PRIMES_54[0] + 2).is_err());
    assert!(HeParams::new(4096, vec![PRIMES_54[0], PRIMES_54[0]], 65537).is_err());
    assert!(HeParams::new(4096, vec![1 << 40], 65537).is_err());
    assert!(HeParams::preset(16384).is_err());
}

#[test]
fn keys_are_shared_across_plain_moduli() {
    let f = fixture(8192);
    let mut r = rng(20);
    let x: u64 = 3_000_000_000;
    let y: u64 = 2_500_000_000;
    let mut residues = Vec::new();
    for &t in &PLAIN_PRIMES[..4] {
        let ctx = f.ctx.with_plain_modulus(t).unwrap();
        assert_eq!(ctx.ring_id(), f.ctx.ring_id());
        let a = ctx.encrypt_with_rng(&f.pk, &ctx.batch_encode(&[x % t]).unwrap(), &mut r).unwrap();
        let b = ctx.encrypt_with_rng(&f.pk, &ctx.batch_encode(&[y % t]).unwrap(), &mut r).unwrap();
        let p = ctx.he_mul(&a, &b, &f.rk).unwrap();
        let slots = ctx.batch_decode(&ctx.decrypt(&f.sk, &p).unwrap()).unwrap();
        residues.push((slots[0], t));
    }
    assert_eq!(crt_combine(&residues), Some(x as u128 * y as u128));
}

#[test]
fn serialization_round_trips() {
    let f = fixture(4096);
    let ctx = &f.ctx;
    let c = f.enc(31337, &mut rng(21));
    let bytes = ctx.ciphertext_to_bytes(&c);
    assert_eq!(ctx.ciphertext_from_bytes(&bytes).unwrap(), c);
    assert_eq!(bytes.len(), 14 + 1 + 4 + 8 + 1 + 2 * 2 * 4096 * 8);
    assert_eq!(ctx.secret_key_from_bytes(&ctx.secret_key_to_bytes(&f.sk)).unwrap(), f.sk);
    assert_eq!(ctx.public_key_from_bytes(&ctx.public_key_to_bytes(&f.pk)).unwrap(), f.pk);
    assert_eq!(ctx.relin_key_from_bytes(&ctx.relin_key_to_bytes(&f.rk)).unwrap(), f.rk);
    let pt = ctx.batch_encode(&[1, 2, 3]).unwrap();
    assert_eq!(ctx.plaintext_from_bytes(&ctx.plaintext_to_bytes(&pt)).unwrap(), pt);

    assert!(matches!(ctx.ciphertext_from_bytes(&bytes[..bytes.len() - 1]), Err(HeError::Malformed(_))));
    let other = ctx.with_plain_modulus(114689).unwrap();
    assert_eq!(other.ciphertext_from_bytes(&bytes), Err(HeError::ParamsMismatch));
    assert!(matches!(ctx.public_key_from_bytes(&bytes), Err(HeError::Malformed(_))));
}

#[test]
fn operations_are_thread_safe() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<HeContext>();
    assert_send_sync::<HeCiphertext>();
    assert_send_sync::<RelinKey>();
    let f = fixture(4096);
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..4)
            .map(|i| {
                s.spawn(move || {
                    let mut r = rng(100 + i);
                    let a = f.enc(i as i64 + 2, &mut r);
                    f.dec(&f.ctx.he_mul(&a, &a, &f.rk).unwrap())
                })
            })
            .collect();
        for (i, h) in handles.into_iter().enumerate() {
            assert_eq!(h.join().unwrap(), (i as i64 + 2).pow(2));
        }
    });
}
