//! Fixed-point sigmoid lookup table.
//!
//! Entry `i` holds `round(sigma(z_min + i * step) * 2^frac)` with
//! `step = (z_max - z_min) / 2^range_bits`. The step must be a power of
//! two in the scale of the dot product (`2 * frac` fractional bits), so
//! the index is a plain bit slice of `z - z_min`.

use dmsc_core::FixedPointSpec;

use crate::error::{AnalyticsError, Result};

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmoidTable {
    spec: FixedPointSpec,
    range_bits: u32,
    z_min: f64,
    z_max: f64,
    /// `z_min` in the dot-product scale.
    z_min_raw: i64,
    /// `log2(step)` in the dot-product scale.
    shift: u32,
    entries: Vec<u64>,
}

pub fn build_sigmoid_table(spec: FixedPointSpec, range_bits: u32, z_min: f64, z_max: f64) -> Result<SigmoidTable> {
    let degenerate = |m: String| Err(AnalyticsError::DegenerateRange(m));
    if !(1..=16).contains(&range_bits) {
        return degenerate(format!("range_bits {range_bits} outside 1..=16"));
    }
    if !(z_min.is_finite() && z_max.is_finite()) || z_max <= z_min {
        return degenerate(format!("[{z_min}, {z_max}] is empty"));
    }
    let prod_frac = 2 * spec.frac_bits();
    let scale = (prod_frac as f64).exp2();
    let z_min_scaled = z_min * scale;
    if z_min_scaled.fract() != 0.0 || z_min_scaled.abs() >= 2f64.powi(62) {
        return degenerate(format!("z_min {z_min} is not a multiple of 2^-{prod_frac}"));
    }
    let step = (z_max - z_min) * scale / (range_bits as f64).exp2();
    if step < 1.0 || step.fract() != 0.0 || !(step as u64).is_power_of_two() {
        return degenerate(format!(
            "step (z_max - z_min) / 2^{range_bits} must be a power of two no finer than 2^-{prod_frac}"
        ));
    }
    let shift = (step as u64).trailing_zeros();
    let out_scale = spec.scale();
    let step_f = (shift as f64).exp2() / scale;
    let entries = (0..1u64 << range_bits)
        .map(|i| (sigmoid(z_min + i as f64 * step_f) * out_scale).round() as u64)
        .collect();
    Ok(SigmoidTable {
        spec,
        range_bits,
        z_min,
        z_max,
        z_min_raw: z_min_scaled as i64,
        shift,
        entries,
    })
}

impl SigmoidTable {
    /// Table over `[-half_width, half_width)`. With a fixed range, each
    /// extra index bit halves the step.
    pub fn symmetric(spec: FixedPointSpec, range_bits: u32, half_width: f64) -> Result<Self> {
        build_sigmoid_table(spec, range_bits, -half_width, half_width)
    }

    pub fn spec(&self) -> FixedPointSpec {
        self.spec
    }

    pub fn range_bits(&self) -> u32 {
        self.range_bits
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn z_min_raw(&self) -> i64 {
        self.z_min_raw
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    /// Width of an output word.
    pub fn out_bits(&self) -> usize {
        self.spec.total_bits() as usize
    }

    /// Step between entries as a real number.
    pub fn step(&self) -> f64 {
        (self.shift as f64).exp2() / ((2 * self.spec.frac_bits()) as f64).exp2()
    }

    /// Table index for a dot product in the `2 * frac` scale, clamped to the
    /// table range.
    pub fn index_of(&self, z_raw: i128) -> usize {
        let d = z_raw - self.z_min_raw as i128;
        if d < 0 {
            return 0;
        }
        let q = d >> self.shift;
        q.min((1i128 << self.range_bits) - 1) as usize
    }

    pub fn lookup(&self, z_raw: i128) -> u64 {
        self.entries[self.index_of(z_raw)]
    }

    /// Worst-case gap between a table entry and the exact sigmoid over the
    /// covered range: half an output quantum for rounding plus the slope
    /// bound `1/4` times one step.
    pub fn quantization_bound(&self) -> f64 {
        0.5 / self.spec.scale() + 0.25 * self.step()
    }
}
