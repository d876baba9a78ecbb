//! The LD decision rule as a Boolean circuit.
//!
//! Every intermediate word is exactly as wide as its operands require, so
//! nothing is truncated. The threshold enters as constant wires.

use dmsc_core::bits::to_bits;
use dmsc_core::builder::zero_extend;
use dmsc_core::{Bit, Circuit, CircuitBuilder, CircuitError, Word};

use crate::error::{AnalyticsError, Result};
use crate::ld::{HaplotypeCounts, LdThreshold};

/// Widest word the final comparator accepts.
pub const MAX_LD_WIDTH: usize = 128;

fn bit_len(x: u64) -> usize {
    (64 - x.leading_zeros() as usize).max(1)
}

fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

/// Name of maker `j`'s input group.
pub fn maker_group(j: usize) -> String {
    format!("maker{j}")
}

/// Width of the comparator in the LD circuit for the given parameters.
pub fn ld_circuit_width(count_bits: usize, makers: usize, threshold: LdThreshold) -> usize {
    let w = count_bits + ceil_log2(makers);
    let lhs = 5 * w + 7 + bit_len(threshold.den);
    let rhs = 4 * w + 4 + bit_len(threshold.num);
    lhs.max(rhs)
}

/// Single-maker LD circuit over `m` instances: inputs are `m` blocks of
/// four `count_bits`-wide counts (`n_AB, n_Ab, n_aB, n_ab`), outputs `m`
/// decision bits.
pub fn build_ld_circuit(count_bits: usize, m: usize, threshold: LdThreshold) -> Result<Circuit> {
    build_ld_circuit_multi(count_bits, m, 1, threshold)
}

/// LD circuit whose counts are the sums of `makers` local contributions.
/// Each maker owns one input group laid out like the single-maker input.
pub fn build_ld_circuit_multi(count_bits: usize, m: usize, makers: usize, threshold: LdThreshold) -> Result<Circuit> {
    if !(1..=32).contains(&count_bits) {
        return Err(CircuitError::WidthOutOfRange {
            width: count_bits,
            min: 1,
            max: 32,
        }
        .into());
    }
    if m == 0 || makers == 0 {
        return Err(AnalyticsError::DimensionMismatch { expected: 1, got: 0 });
    }
    let width = ld_circuit_width(count_bits, makers, threshold);
    if width > MAX_LD_WIDTH {
        return Err(CircuitError::WidthOverflow {
            bits: width,
            max: MAX_LD_WIDTH,
        }
        .into());
    }

    let mut b = CircuitBuilder::new();
    let groups: Vec<Word> = (0..makers)
        .map(|j| b.input(&maker_group(j), m * 4 * count_bits))
        .collect();
    let den = b.constant_word(threshold.den as u128, bit_len(threshold.den));
    let num = b.constant_word(threshold.num as u128, bit_len(threshold.num));

    let mut decisions = Vec::with_capacity(m);
    for i in 0..m {
        let counts: Vec<Word> = (0..4)
            .map(|k| {
                let off = (4 * i + k) * count_bits;
                let parts: Vec<Word> = groups.iter().map(|g| g[off..off + count_bits].to_vec()).collect();
                sum_tree(&mut b, parts)
            })
            .collect();
        decisions.push(ld_instance(&mut b, &counts, &den, &num));
    }
    b.output("decision", &decisions);
    Ok(b.finish())
}

/// Pairwise adder tree; each level widens by one bit.
fn sum_tree(b: &mut CircuitBuilder, mut words: Vec<Word>) -> Word {
    while words.len() > 1 {
        let mut next = Vec::with_capacity(words.len().div_ceil(2));
        let mut it = words.into_iter();
        while let Some(x) = it.next() {
            match it.next() {
                Some(y) => next.push(b.add_extend(&x, &y)),
                None => {
                    let z = zero_extend(b, &x, x.len() + 1);
                    next.push(z);
                }
            }
        }
        words = next;
    }
    words.pop().expect("at least one maker")
}

#[allow(non_snake_case)]
fn ld_instance(b: &mut CircuitBuilder, c: &[Word], den: &[Bit], num: &[Bit]) -> Bit {
    let (n_AB, n_Ab, n_aB, n_ab) = (&c[0], &c[1], &c[2], &c[3]);
    let N_A = b.add_extend(n_AB, n_Ab);
    let N_a = b.add_extend(n_aB, n_ab);
    let N_B = b.add_extend(n_AB, n_aB);
    let N_b = b.add_extend(n_Ab, n_ab);
    let n = b.add_extend(&N_A, &N_a);

    let t1 = b.mul(&n, n_AB);
    let t2 = b.mul(&N_A, &N_B);
    let w = t1.len().max(t2.len()) + 1;
    let t1 = zero_extend(b, &t1, w);
    let t2 = zero_extend(b, &t2, w);
    let diff = b.sub(&t1, &t2);
    let abs = b.cond_negate(&diff, diff[w - 1]);
    let abs = &abs[..w - 1];
    let sq = b.mul(abs, abs);
    let sq_n = b.mul(&sq, &n);
    // Doubling is a rewire.
    let zero = b.zero();
    let lhs: Word = std::iter::once(zero).chain(sq_n).collect();
    let lhs = b.mul(&lhs, den);

    let p1 = b.mul(&N_A, &N_a);
    let p2 = b.mul(&N_B, &N_b);
    let p = b.mul(&p1, &p2);
    let rhs = b.mul(&p, num);

    let width = lhs.len().max(rhs.len());
    let lhs = zero_extend(b, &lhs, width);
    let rhs = zero_extend(b, &rhs, width);
    b.gt(&lhs, &rhs)
}

/// One maker's input bits for the LD circuit.
pub fn encode_ld_inputs(counts: &[HaplotypeCounts], count_bits: usize) -> Result<Vec<bool>> {
    let mut bits = Vec::with_capacity(counts.len() * 4 * count_bits);
    for c in counts {
        for v in c.as_array() {
            if count_bits < 64 && v >> count_bits != 0 {
                return Err(AnalyticsError::CountOverflow { value: v, bits: count_bits });
            }
            bits.extend(to_bits(v as u128, count_bits));
        }
    }
    Ok(bits)
}

/// Smallest count width that holds every count in `counts`.
pub fn count_bits_for(counts: &[HaplotypeCounts]) -> usize {
    counts
        .iter()
        .flat_map(|c| c.as_array())
        .map(bit_len)
        .max()
        .unwrap_or(1)
}
