//! Fixed-key AES gate hash.
//!
//! `H(x, i) = pi(sigma(x) ^ i) ^ sigma(x) ^ i`, where `pi` is AES-128 under a
//! public fixed key and `sigma(xl || xr) = (xl ^ xr) || xl` is a linear
//! orthomorphism. The tweak `i` is derived from the gate position.

use std::sync::LazyLock;

use aes::cipher::{generic_array::GenericArray, BlockEncrypt, KeyInit};
use aes::Aes128;

use crate::label::WireLabel;

const FIXED_KEY: [u8; 16] = *b"dmsc-gc-fixedkey";

static PI: LazyLock<Aes128> = LazyLock::new(|| Aes128::new(&GenericArray::from(FIXED_KEY)));

#[inline]
fn sigma(x: u128) -> u128 {
    let hi = x >> 64;
    let lo = x & u64::MAX as u128;
    ((hi ^ lo) << 64) | hi
}

#[inline]
pub fn hash(x: WireLabel, tweak: u64) -> WireLabel {
    let s = sigma(x.0) ^ tweak as u128;
    let mut block = GenericArray::from(s.to_le_bytes());
    PI.encrypt_block(&mut block);
    WireLabel(u128::from_le_bytes(block.into()) ^ s)
}

/// Two hashes with one AES call each, batched for the pipeline.
#[inline]
pub fn hash2(x: WireLabel, tx: u64, y: WireLabel, ty: u64) -> (WireLabel, WireLabel) {
    let sx = sigma(x.0) ^ tx as u128;
    let sy = sigma(y.0) ^ ty as u128;
    let mut blocks = [
        GenericArray::from(sx.to_le_bytes()),
        GenericArray::from(sy.to_le_bytes()),
    ];
    PI.encrypt_blocks(&mut blocks);
    (
        WireLabel(u128::from_le_bytes(blocks[0].into()) ^ sx),
        WireLabel(u128::from_le_bytes(blocks[1].into()) ^ sy),
    )
}

/// Four hashes in one AES batch.
#[inline]
pub fn hash4(xs: [WireLabel; 4], ts: [u64; 4]) -> [WireLabel; 4] {
    let s: [u128; 4] = std::array::from_fn(|i| sigma(xs[i].0) ^ ts[i] as u128);
    let mut blocks = s.map(|v| GenericArray::from(v.to_le_bytes()));
    PI.encrypt_blocks(&mut blocks);
    std::array::from_fn(|i| WireLabel(u128::from_le_bytes(blocks[i].into()) ^ s[i]))
}
