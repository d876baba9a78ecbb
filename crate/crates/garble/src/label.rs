use std::ops::{BitXor, BitXorAssign};

use aes::cipher::{generic_array::GenericArray, BlockEncrypt, KeyInit};
use aes::Aes128;
use rand::{CryptoRng, Rng};

/// A 128-bit wire label. The least-significant bit is the point bit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct WireLabel(pub u128);

impl WireLabel {
    pub const ZERO: WireLabel = WireLabel(0);

    pub fn random<R: Rng + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        WireLabel(rng.gen())
    }

    #[inline]
    pub fn point(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn select(self, bit: bool) -> Self {
        if bit {
            self
        } else {
            WireLabel::ZERO
        }
    }

    pub fn to_bytes(self) -> [u8; 16] {
        self.0.to_le_bytes()
    }

    pub fn from_bytes(b: [u8; 16]) -> Self {
        WireLabel(u128::from_le_bytes(b))
    }
}

impl std::fmt::Debug for WireLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "WireLabel({:032x})", self.0)
    }
}

impl BitXor for WireLabel {
    type Output = WireLabel;
    #[inline]
    fn bitxor(self, rhs: Self) -> Self {
        WireLabel(self.0 ^ rhs.0)
    }
}

impl BitXorAssign for WireLabel {
    #[inline]
    fn bitxor_assign(&mut self, rhs: Self) {
        self.0 ^= rhs.0;
    }
}

/// Global free-XOR offset. Its least-significant bit is always 1, so the
/// two labels of every wire carry different point bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GlobalDelta(WireLabel);

impl GlobalDelta {
    /// Forces the point bit to 1.
    pub fn new(bits: u128) -> Self {
        GlobalDelta(WireLabel(bits | 1))
    }

    pub fn random<R: Rng + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        Self::new(rng.gen())
    }

    pub fn label(self) -> WireLabel {
        self.0
    }

    pub fn to_bytes(self) -> [u8; 16] {
        self.0.to_bytes()
    }

    pub fn from_bytes(b: [u8; 16]) -> Self {
        Self::new(u128::from_le_bytes(b))
    }
}

impl std::fmt::Debug for GlobalDelta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("GlobalDelta(..)")
    }
}

impl BitXor<GlobalDelta> for WireLabel {
    type Output = WireLabel;
    #[inline]
    fn bitxor(self, rhs: GlobalDelta) -> WireLabel {
        self ^ rhs.0
    }
}

fn aes_encrypt(cipher: &Aes128, x: u128) -> u128 {
    let mut block = GenericArray::from(x.to_le_bytes());
    cipher.encrypt_block(&mut block);
    u128::from_le_bytes(block.into())
}

/// Expands a 16-byte seed into a delta: `AES_seed(0)` with the lsb set.
pub fn derive_delta(seed: [u8; 16]) -> GlobalDelta {
    let cipher = Aes128::new(&GenericArray::from(seed));
    GlobalDelta::new(aes_encrypt(&cipher, 0))
}

/// The input-label PRF: AES keyed by `k`, applied to a 16-byte message.
#[derive(Clone)]
pub struct PrfKey {
    bytes: [u8; 16],
    cipher: Aes128,
}

impl PrfKey {
    pub fn new(bytes: [u8; 16]) -> Self {
        Self {
            bytes,
            cipher: Aes128::new(&GenericArray::from(bytes)),
        }
    }

    pub fn random<R: Rng + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        Self::new(rng.gen())
    }

    pub fn to_bytes(&self) -> [u8; 16] {
        self.bytes
    }
}

impl std::fmt::Debug for PrfKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("PrfKey(..)")
    }
}

/// PRF message for bit `bit` of maker `maker`'s input.
pub fn maker_wire_message(maker: u32, bit: u64) -> u128 {
    ((maker as u128) << 64) | bit as u128
}

/// Zero-label of the input wire identified by `message`. The one-label is
/// this value XOR delta; a maker holding bit `b` submits
/// `derive_input_label(k, m) ^ (b * delta)` without contacting anyone.
pub fn derive_input_label(key: &PrfKey, message: u128) -> WireLabel {
    WireLabel(aes_encrypt(&key.cipher, message))
}

/// Active label for a maker-held bit.
pub fn maker_active_label(key: &PrfKey, delta: GlobalDelta, message: u128, bit: bool) -> WireLabel {
    derive_input_label(key, message) ^ delta.label().select(bit)
}
