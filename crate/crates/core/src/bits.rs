//! Packing integers into little-endian bit vectors and back.

pub fn to_bits(value: u128, width: usize) -> Vec<bool> {
    (0..width).map(|i| i < 128 && (value >> i) & 1 == 1).collect()
}

pub fn from_bits(bits: &[bool]) -> u128 {
    assert!(bits.len() <= 128, "word wider than 128 bits");
    bits.iter()
        .enumerate()
        .fold(0u128, |acc, (i, &b)| acc | ((b as u128) << i))
}

/// Two's-complement encoding of `value` in `width` bits.
pub fn to_bits_signed(value: i128, width: usize) -> Vec<bool> {
    to_bits(value as u128, width)
}

/// Sign-extends a two's-complement bit vector.
pub fn from_bits_signed(bits: &[bool]) -> i128 {
    let n = bits.len();
    let raw = from_bits(bits);
    if n == 0 || n >= 128 || !bits[n - 1] {
        raw as i128
    } else {
        (raw as i128) - (1i128 << n)
    }
}

/// Concatenates several words of `width` bits each.
pub fn pack_words(values: &[u128], width: usize) -> Vec<bool> {
    values.iter().flat_map(|&v| to_bits(v, width)).collect()
}
