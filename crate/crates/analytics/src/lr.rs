//! Logistic-regression inference with a fixed-point dot product and a
//! sigmoid lookup.

use dmsc_core::bits::to_bits_signed;
use dmsc_core::builder::sign_extend;
use dmsc_core::builders::table_words;
use dmsc_core::{Bit, Circuit, CircuitBuilder, FixedPointSpec, Word};

use crate::error::{AnalyticsError, Result};
use crate::ld_circuit::maker_group;
use crate::sigmoid::{sigmoid, SigmoidTable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LrModel {
    pub spec: FixedPointSpec,
    /// Raw weights with `spec.frac_bits()` fractional bits.
    pub weights: Vec<i64>,
    pub bias: i64,
}

fn exact_raw(spec: FixedPointSpec, v: f64) -> Result<i64> {
    let raw = (v * spec.scale()).round();
    let unrepresentable = AnalyticsError::Unrepresentable {
        value: v,
        total_bits: spec.total_bits(),
        frac_bits: spec.frac_bits(),
    };
    if !raw.is_finite() || raw < spec.min_raw() as f64 || raw > spec.max_raw() as f64 {
        return Err(unrepresentable);
    }
    Ok(raw as i64)
}

impl LrModel {
    /// Rounds real weights to the spec; fails if any value is out of range.
    pub fn from_f64(spec: FixedPointSpec, weights: &[f64], bias: f64) -> Result<Self> {
        Ok(Self {
            spec,
            weights: weights.iter().map(|&w| exact_raw(spec, w)).collect::<Result<_>>()?,
            bias: exact_raw(spec, bias)?,
        })
    }

    pub fn dims(&self) -> usize {
        self.weights.len()
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(|&w| self.spec.to_f64(w)).collect()
    }

    pub fn bias_f64(&self) -> f64 {
        self.spec.to_f64(self.bias)
    }

    /// Dot product plus bias in the `2 * frac` scale.
    pub fn dot_raw(&self, x_raw: &[i64]) -> Result<i128> {
        self.check_dims(x_raw.len())?;
        let acc: i128 = x_raw.iter().zip(&self.weights).map(|(&x, &w)| x as i128 * w as i128).sum();
        Ok(acc + ((self.bias as i128) << self.spec.frac_bits()))
    }

    fn check_dims(&self, got: usize) -> Result<()> {
        if got != self.dims() {
            return Err(AnalyticsError::DimensionMismatch {
                expected: self.dims(),
                got,
            });
        }
        Ok(())
    }
}

/// Saturating quantization of a feature vector.
pub fn quantize_features(spec: FixedPointSpec, x: &[f64]) -> Vec<i64> {
    x.iter().map(|&v| spec.quantize(v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrPrediction {
    pub z_raw: i128,
    pub index: usize,
    /// Probability with `frac_bits` fractional bits.
    pub prob_raw: u64,
    pub prob: f64,
}

/// Fixed-point path: the bit-exact oracle for the circuit.
pub fn lr_predict_plain(model: &LrModel, table: &SigmoidTable, x_raw: &[i64]) -> Result<LrPrediction> {
    if table.spec() != model.spec {
        return Err(AnalyticsError::DegenerateRange("table and model use different fixed-point specs".into()));
    }
    let z_raw = model.dot_raw(x_raw)?;
    let index = table.index_of(z_raw);
    let prob_raw = table.entries()[index];
    Ok(LrPrediction {
        z_raw,
        index,
        prob_raw,
        prob: prob_raw as f64 / model.spec.scale(),
    })
}

/// Full-precision path on real-valued features and the model's weights.
pub fn lr_predict_float(model: &LrModel, x: &[f64]) -> Result<f64> {
    model.check_dims(x.len())?;
    let z: f64 = x.iter().zip(model.weights_f64()).map(|(a, w)| a * w).sum::<f64>() + model.bias_f64();
    Ok(sigmoid(z))
}

/// Name of feature `i`'s input group.
pub fn feature_group(i: usize) -> String {
    format!("x{i}")
}

/// Accumulator width for `d` products of two `total_bits` words plus bias.
pub fn lr_accumulator_bits(spec: FixedPointSpec, dims: usize) -> usize {
    let terms = dims + 1;
    2 * spec.total_bits() as usize + (usize::BITS - terms.leading_zeros()) as usize
}

/// Dot product, range reduction and table lookup. Inputs are one group
/// per feature, `total_bits` wide, two's complement; the single output
/// group `prob` holds the table entry.
pub fn build_lr_circuit(model: &LrModel, table: &SigmoidTable) -> Result<Circuit> {
    check_table(model, table)?;
    let tb = model.spec.total_bits() as usize;
    let mut b = CircuitBuilder::new();
    let xs: Vec<Word> = (0..model.dims()).map(|i| b.input(&feature_group(i), tb)).collect();
    let words = lookup_words(&mut b, table)?;
    let out = lr_instance(&mut b, model, table, &xs, &words);
    b.output("prob", &out);
    Ok(b.finish())
}

/// Several rows split among makers. Maker `j` owns input group `maker{j}`
/// holding `rows_per_maker[j]` rows back to back; output group `prob`
/// holds one entry per row in maker order. The table constants are shared.
pub fn build_lr_circuit_multi(model: &LrModel, table: &SigmoidTable, rows_per_maker: &[usize]) -> Result<Circuit> {
    check_table(model, table)?;
    if rows_per_maker.iter().sum::<usize>() == 0 {
        return Err(AnalyticsError::DimensionMismatch { expected: 1, got: 0 });
    }
    let tb = model.spec.total_bits() as usize;
    let d = model.dims();
    let mut b = CircuitBuilder::new();
    let groups: Vec<Word> = rows_per_maker
        .iter()
        .enumerate()
        .map(|(j, &r)| b.input(&maker_group(j), r * d * tb))
        .collect();
    let words = lookup_words(&mut b, table)?;
    let mut out = Vec::new();
    for g in &groups {
        for row in g.chunks(d * tb) {
            let xs: Vec<Word> = row.chunks(tb).map(<[Bit]>::to_vec).collect();
            out.extend(lr_instance(&mut b, model, table, &xs, &words));
        }
    }
    b.output("prob", &out);
    Ok(b.finish())
}

fn check_table(model: &LrModel, table: &SigmoidTable) -> Result<()> {
    if table.spec() != model.spec {
        return Err(AnalyticsError::DegenerateRange("table and model use different fixed-point specs".into()));
    }
    Ok(())
}

fn lookup_words(b: &mut CircuitBuilder, table: &SigmoidTable) -> Result<Vec<Word>> {
    let entries: Vec<u128> = table.entries().iter().map(|&e| e as u128).collect();
    Ok(table_words(b, &entries, table.range_bits() as usize, table.out_bits())?)
}

fn lr_instance(b: &mut CircuitBuilder, model: &LrModel, table: &SigmoidTable, xs: &[Word], words: &[Word]) -> Word {
    let spec = model.spec;
    let tb = spec.total_bits() as usize;
    let width = lr_accumulator_bits(spec, model.dims()) + 1;

    let mut acc: Option<Word> = None;
    for (x, &w) in xs.iter().zip(&model.weights) {
        let wc = constant_signed(b, w as i128, tb);
        let p = b.mul_signed(x, &wc);
        let p = sign_extend(&p, width);
        acc = Some(match acc {
            None => p,
            Some(a) => b.add(&a, &p),
        });
    }
    let bias = constant_signed(b, (model.bias as i128) << spec.frac_bits(), width);
    let z = match acc {
        Some(a) => b.add(&a, &bias),
        None => bias,
    };
    let zmin = constant_signed(b, table.z_min_raw() as i128, width);
    let d = b.sub(&z, &zmin);

    let r = table.range_bits() as usize;
    let shift = table.shift() as usize;
    let negative = d[width - 1];
    let q = &d[shift.min(width - 1)..width - 1];
    let (low, high): (Vec<Bit>, &[Bit]) = if q.len() > r {
        (q[..r].to_vec(), &q[r..])
    } else {
        let mut low = q.to_vec();
        while low.len() < r {
            low.push(b.zero());
        }
        (low, &[])
    };
    let mut overflow: Option<Bit> = None;
    for &h in high {
        overflow = Some(match overflow {
            None => h,
            Some(o) => b.or(o, h),
        });
    }
    let ones = vec![b.one(); r];
    let zeros = vec![b.zero(); r];
    let idx = match overflow {
        Some(o) => b.mux_word(o, &low, &ones),
        None => low,
    };
    let idx = b.mux_word(negative, &idx, &zeros);
    b.select(&idx, words)
}

fn constant_signed(b: &mut CircuitBuilder, v: i128, width: usize) -> Word {
    let mask = if width >= 128 { u128::MAX } else { (1u128 << width) - 1 };
    b.constant_word(v as u128 & mask, width)
}

/// Input bits for `x_raw`, one group per feature.
pub fn encode_lr_inputs(spec: FixedPointSpec, x_raw: &[i64]) -> Vec<bool> {
    x_raw
        .iter()
        .flat_map(|&v| to_bits_signed(v as i128, spec.total_bits() as usize))
        .collect()
}
