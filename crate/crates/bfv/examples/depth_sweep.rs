use dmsc_bfv::*;
use rand::SeedableRng;
use std::time::Instant;

fn main() {
    for params in [HeParams::n4096(), HeParams::n8192()] {
        for t in [65537u64, 163841] {
            let ctx = HeContext::new(params.with_plain_modulus(t).unwrap()).unwrap();
            let (sk, pk, rk) = keygen_seeded(&ctx, 1);
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(2);
            let mut c = ctx.encrypt_with_rng(&pk, &ctx.encode_scalar(3), &mut rng).unwrap();
            let mut expect: u64 = 3;
            println!("n={} t={} logq={:.1} fresh exact={} est={:.1}", ctx.n(), t, ctx.log2_q(), ctx.noise_budget(&sk, &c).unwrap(), ctx.estimated_budget(&c));
            for d in 1..=6 {
                let f = ctx.encrypt_with_rng(&pk, &ctx.encode_scalar(7), &mut rng).unwrap();
                let st = Instant::now();
                match ctx.he_mul(&c, &f, &rk) {
                    Ok(x) => {
                        let el = st.elapsed();
                        c = x;
                        expect = expect * 7 % t;
                        let dec = ctx.decrypt(&sk, &c).map(|p| p.constant());
                        println!("  depth {d}: exact={} est={:.1} ok={:?} mul={:?}", ctx.noise_budget(&sk, &c).unwrap(), ctx.estimated_budget(&c), dec.map(|v| v == expect), el);
                    }
                    Err(e) => { println!("  depth {d}: {e}"); break; }
                }
            }
        }
    }
}
