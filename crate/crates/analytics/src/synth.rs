//! Synthetic data generators for tests and benchmarks.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use dmsc_core::FixedPointSpec;

use crate::error::Result;
use crate::io::Samples;
use crate::ld::HaplotypeCounts;
use crate::lr::LrModel;

/// Uniform random counts with total at most `max_total` and every margin
/// positive.
pub fn random_counts<R: Rng>(rng: &mut R, max_total: u64) -> HaplotypeCounts {
    assert!(max_total >= 2, "need at least two haplotypes for positive margins");
    loop {
        let total = rng.gen_range(2..=max_total);
        let mut cuts = [rng.gen_range(0..=total), rng.gen_range(0..=total), rng.gen_range(0..=total)];
        cuts.sort_unstable();
        let c = HaplotypeCounts::new(cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1], total - cuts[2]);
        if c.N_A() > 0 && c.N_a() > 0 && c.N_B() > 0 && c.N_b() > 0 {
            return c;
        }
    }
}

/// Draws `total` haplotypes from a population with allele frequencies
/// `p_a`, `p_b` and disequilibrium coefficient `d` (clamped to the range
/// those frequencies allow).
pub fn synth_haplotypes<R: Rng>(rng: &mut R, total: u64, p_a: f64, p_b: f64, d: f64) -> HaplotypeCounts {
    let lo = (-(p_a * p_b)).max(-((1.0 - p_a) * (1.0 - p_b)));
    let hi = (p_a * (1.0 - p_b)).min((1.0 - p_a) * p_b);
    let d = d.clamp(lo, hi);
    let p_ab = p_a * p_b + d;
    let probs = [p_ab, p_a - p_ab, p_b - p_ab, 1.0 - p_a - p_b + p_ab].map(|p| p.max(0.0));
    let dist = WeightedIndex::new(probs).expect("non-degenerate frequencies");
    let mut counts = [0u64; 4];
    for _ in 0..total {
        counts[dist.sample(rng)] += 1;
    }
    HaplotypeCounts::from_array(counts)
}

/// Counts in exact equilibrium (`N n_AB = N_A N_B`): `k` times the outer
/// product of `(a, s - a)` and `(b, s - b)`, with `s = floor(sqrt(total))`
/// and `k = total / s^2`, so the total is `k s^2 <= total`.
pub fn equilibrium_haplotypes(total: u64, p_a: f64, p_b: f64) -> HaplotypeCounts {
    assert!(total >= 4, "need at least four haplotypes");
    let s = (total as f64).sqrt().floor() as u64;
    let s = if (s + 1) * (s + 1) <= total { s + 1 } else { s };
    let k = total / (s * s);
    let pick = |p: f64| ((p * s as f64).round() as u64).clamp(1, s - 1);
    let (a, b) = (pick(p_a), pick(p_b));
    HaplotypeCounts::new(k * a * b, k * a * (s - b), k * (s - a) * b, k * (s - a) * (s - b))
}

/// `m` independent instances, each split across `makers` local count
/// vectors that sum to the instance. Returns `[maker][instance]`.
pub fn split_among_makers<R: Rng>(rng: &mut R, instances: &[HaplotypeCounts], makers: usize) -> Vec<Vec<HaplotypeCounts>> {
    let mut out = vec![Vec::with_capacity(instances.len()); makers];
    for inst in instances {
        let mut remaining = inst.as_array();
        for (j, slot) in out.iter_mut().enumerate() {
            let share = if j + 1 == makers {
                remaining
            } else {
                remaining.map(|r| rng.gen_range(0..=r))
            };
            for k in 0..4 {
                remaining[k] -= share[k];
            }
            slot.push(HaplotypeCounts::from_array(share));
        }
    }
    out
}

/// Two Gaussian clusters, labels 0/1, features roughly standardized.
pub fn synth_lr_samples<R: Rng>(rng: &mut R, rows: usize, dims: usize) -> Samples {
    let mut features = Vec::with_capacity(rows);
    let mut labels = Vec::with_capacity(rows);
    for _ in 0..rows {
        let label: u8 = rng.gen_range(0..=1);
        let shift = if label == 1 { 0.75 } else { -0.75 };
        let row = (0..dims).map(|_| shift + gaussian(rng)).collect();
        features.push(row);
        labels.push(label);
    }
    Samples {
        features,
        labels: Some(labels),
    }
}

/// Small random weights, representable in `spec`.
pub fn synth_lr_model<R: Rng>(rng: &mut R, spec: FixedPointSpec, dims: usize) -> Result<LrModel> {
    let weights: Vec<f64> = (0..dims).map(|_| rng.gen_range(-0.5..0.5)).collect();
    LrModel::from_f64(spec, &weights, rng.gen_range(-0.5..0.5))
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
