//! `gen-data`: seeded synthetic fixtures.

use dmsc_analytics::io::Samples;
use dmsc_analytics::synth::{equilibrium_haplotypes, synth_haplotypes, synth_lr_samples};
use dmsc_analytics::HaplotypeCounts;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{CliError, Result};

fn check_freq(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("`{name}` must lie strictly between 0 and 1")))
    }
}

/// `rows` pooled instances with totals in `[ceil(n/2), n]`. With `d == 0`
/// every instance is in exact equilibrium; otherwise haplotypes are drawn
/// from a population with disequilibrium `d`.
pub fn gen_haplotypes(seed: u64, rows: usize, n: u64, d: f64, p_a: f64, p_b: f64) -> Result<Vec<HaplotypeCounts>> {
    check_freq("p-a", p_a)?;
    check_freq("p-b", p_b)?;
    if rows == 0 {
        return Err(CliError::Config("`rows` must be at least 1".into()));
    }
    if n < 4 {
        return Err(CliError::Config("`N` must be at least 4".into()));
    }
    if !d.is_finite() || d.abs() > 0.25 {
        return Err(CliError::Config("`D` must lie in [-0.25, 0.25]".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Ok((0..rows)
        .map(|_| {
            let total = rng.gen_range(n.div_ceil(2).max(4)..=n);
            if d == 0.0 {
                equilibrium_haplotypes(total, p_a, p_b)
            } else {
                synth_haplotypes(&mut rng, total, p_a, p_b, d)
            }
        })
        .collect())
}

pub fn gen_lr_samples(seed: u64, rows: usize, dims: usize) -> Result<Samples> {
    if rows == 0 || dims == 0 {
        return Err(CliError::Config("`rows` and `dims` must be at least 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Ok(synth_lr_samples(&mut rng, rows, dims))
}
