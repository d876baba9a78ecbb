//! Stand-alone circuits for the basic arithmetic blocks.

use crate::builder::{check_width, CircuitBuilder, Word};
use crate::circuit::Circuit;
use crate::error::{CircuitError, Result};

/// `a + b mod 2^n_bits`. Ripple-carry, `n_bits - 1` AND gates.
pub fn build_adder(n_bits: usize) -> Result<Circuit> {
    check_width(n_bits, 1, 64)?;
    let mut b = CircuitBuilder::new();
    let x = b.input("a", n_bits);
    let y = b.input("b", n_bits);
    let s = b.add(&x, &y);
    b.output("sum", &s);
    Ok(b.finish())
}

/// Full `2 * n_bits` unsigned product.
pub fn build_multiplier(n_bits: usize) -> Result<Circuit> {
    check_width(n_bits, 1, 32)?;
    let mut b = CircuitBuilder::new();
    let x = b.input("a", n_bits);
    let y = b.input("b", n_bits);
    let p = b.mul(&x, &y);
    b.output("product", &p);
    Ok(b.finish())
}

/// Single output bit, set iff `a > b` (unsigned).
pub fn build_greater_than(n_bits: usize) -> Result<Circuit> {
    check_width(n_bits, 1, 128)?;
    let mut b = CircuitBuilder::new();
    let x = b.input("a", n_bits);
    let y = b.input("b", n_bits);
    let g = b.gt(&x, &y);
    b.output("gt", &[g]);
    Ok(b.finish())
}

/// Table values as constant words, validated against `out_bits`.
pub fn table_words(
    b: &mut CircuitBuilder,
    table: &[u128],
    index_bits: usize,
    out_bits: usize,
) -> Result<Vec<Word>> {
    check_width(index_bits, 1, 24)?;
    check_width(out_bits, 1, 128)?;
    let expected = 1usize << index_bits;
    if table.len() != expected {
        return Err(CircuitError::TableLength {
            got: table.len(),
            index_bits,
            expected,
        });
    }
    if out_bits < 128 {
        if let Some((index, &value)) = table.iter().enumerate().find(|(_, &v)| v >> out_bits != 0) {
            return Err(CircuitError::ValueOverflow {
                index,
                value,
                bits: out_bits,
            });
        }
    }
    Ok(table.iter().map(|&v| b.constant_word(v, out_bits)).collect())
}

/// Private lookup `table[index]` as a multiplexer tree over constant wires.
/// Costs `(2^index_bits - 1) * out_bits` AND gates.
pub fn build_lookup(table: &[u128], index_bits: usize, out_bits: usize) -> Result<Circuit> {
    let mut b = CircuitBuilder::new();
    let index = b.input("index", index_bits);
    let words = table_words(&mut b, table, index_bits, out_bits)?;
    let v = b.select(&index, &words);
    b.output("value", &v);
    Ok(b.finish())
}
