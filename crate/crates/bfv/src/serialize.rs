//! Little-endian dumps with a magic, a kind byte and the parameter hash.
//!
//! Layout: `b"DMHE"`, version `u8`, kind `u8`, id `u64` (parameter id for
//! ciphertexts and plaintexts, ring id for keys), then kind-specific
//! fields and residues as `u64` in limb-major order.

use crate::context::HeContext;
use crate::encoding::{Encoding, Plaintext};
use crate::error::{HeError, Result};
use crate::keys::{PublicKey, RelinKey, SecretKey};
use crate::ops::HeCiphertext;
use crate::ring::RnsPoly;

const MAGIC: &[u8; 4] = b"DMHE";
const VERSION: u8 = 1;
const KIND_CT: u8 = 1;
const KIND_SK: u8 = 2;
const KIND_PK: u8 = 3;
const KIND_RK: u8 = 4;
const KIND_PT: u8 = 5;

struct Writer(Vec<u8>);

impl Writer {
    fn new(kind: u8, id: u64) -> Self {
        let mut v = Vec::new();
        v.extend_from_slice(MAGIC);
        v.push(VERSION);
        v.push(kind);
        v.extend_from_slice(&id.to_le_bytes());
        Writer(v)
    }

    fn u32(&mut self, x: u32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }

    fn u64(&mut self, x: u64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }

    fn poly(&mut self, p: &RnsPoly) {
        for limb in &p.limbs {
            for &x in limb {
                self.u64(x);
            }
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], kind: u8, id: u64) -> Result<Self> {
        if buf.len() < 14 || &buf[..4] != MAGIC {
            return Err(HeError::Malformed("bad magic".into()));
        }
        if buf[4] != VERSION {
            return Err(HeError::Malformed(format!("unsupported version {}", buf[4])));
        }
        if buf[5] != kind {
            return Err(HeError::Malformed(format!("expected kind {kind}, found {}", buf[5])));
        }
        let got = u64::from_le_bytes(buf[6..14].try_into().unwrap());
        if got != id {
            return Err(HeError::ParamsMismatch);
        }
        Ok(Reader { buf, pos: 14 })
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| HeError::Malformed("truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn poly(&mut self, moduli: &[u64], n: usize) -> Result<RnsPoly> {
        let mut limbs = Vec::with_capacity(moduli.len());
        for &q in moduli {
            let mut limb = Vec::with_capacity(n);
            for _ in 0..n {
                let x = self.u64()?;
                if x >= q {
                    return Err(HeError::Malformed("residue not reduced".into()));
                }
                limb.push(x);
            }
            limbs.push(limb);
        }
        Ok(RnsPoly { limbs })
    }

    fn finish(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(HeError::Malformed("trailing bytes".into()));
        }
        Ok(())
    }
}

impl HeContext {
    fn q_values(&self) -> Vec<u64> {
        self.params.q_primes.clone()
    }

    pub fn ciphertext_to_bytes(&self, c: &HeCiphertext) -> Vec<u8> {
        let mut w = Writer::new(KIND_CT, c.param_id);
        w.0.push(c.encoding.tag());
        w.u32(c.depth);
        w.u64(c.noise_log2.to_bits());
        w.0.push(c.polys.len() as u8);
        for p in &c.polys {
            w.poly(p);
        }
        w.0
    }

    pub fn ciphertext_from_bytes(&self, bytes: &[u8]) -> Result<HeCiphertext> {
        let mut r = Reader::new(bytes, KIND_CT, self.param_id)?;
        let encoding = Encoding::from_tag(r.u8()?)?;
        let depth = r.u32()?;
        let noise_log2 = f64::from_bits(r.u64()?);
        let count = r.u8()? as usize;
        if count != 2 {
            return Err(HeError::ComponentCount(count));
        }
        let q = self.q_values();
        let polys = (0..count).map(|_| r.poly(&q, self.n())).collect::<Result<_>>()?;
        r.finish()?;
        Ok(HeCiphertext {
            param_id: self.param_id,
            encoding,
            polys,
            noise_log2,
            depth,
        })
    }

    pub fn plaintext_to_bytes(&self, pt: &Plaintext) -> Vec<u8> {
        let mut w = Writer::new(KIND_PT, pt.param_id);
        w.0.push(pt.encoding.tag());
        for &c in &pt.coeffs {
            w.u64(c);
        }
        w.0
    }

    pub fn plaintext_from_bytes(&self, bytes: &[u8]) -> Result<Plaintext> {
        let mut r = Reader::new(bytes, KIND_PT, self.param_id)?;
        let encoding = Encoding::from_tag(r.u8()?)?;
        let coeffs = r.poly(&[self.t()], self.n())?.limbs.remove(0);
        r.finish()?;
        Ok(Plaintext {
            coeffs,
            encoding,
            param_id: self.param_id,
        })
    }

    pub fn secret_key_to_bytes(&self, sk: &SecretKey) -> Vec<u8> {
        let mut w = Writer::new(KIND_SK, sk.ring_id);
        w.poly(&sk.s);
        w.0
    }

    pub fn secret_key_from_bytes(&self, bytes: &[u8]) -> Result<SecretKey> {
        let mut r = Reader::new(bytes, KIND_SK, self.ring_id)?;
        let s = r.poly(&self.q_values(), self.n())?;
        r.finish()?;
        Ok(SecretKey { ring_id: self.ring_id, s })
    }

    pub fn public_key_to_bytes(&self, pk: &PublicKey) -> Vec<u8> {
        let mut w = Writer::new(KIND_PK, pk.ring_id);
        w.poly(&pk.p0);
        w.poly(&pk.p1);
        w.0
    }

    pub fn public_key_from_bytes(&self, bytes: &[u8]) -> Result<PublicKey> {
        let mut r = Reader::new(bytes, KIND_PK, self.ring_id)?;
        let q = self.q_values();
        let p0 = r.poly(&q, self.n())?;
        let p1 = r.poly(&q, self.n())?;
        r.finish()?;
        Ok(PublicKey {
            ring_id: self.ring_id,
            p0,
            p1,
        })
    }

    pub fn relin_key_to_bytes(&self, rk: &RelinKey) -> Vec<u8> {
        let mut w = Writer::new(KIND_RK, rk.ring_id);
        w.u32(rk.digit_bits);
        w.u32(rk.digits_per_prime as u32);
        w.u32(rk.keys.len() as u32);
        for (b, a) in &rk.keys {
            w.poly(b);
            w.poly(a);
        }
        w.0
    }

    pub fn relin_key_from_bytes(&self, bytes: &[u8]) -> Result<RelinKey> {
        let mut r = Reader::new(bytes, KIND_RK, self.ring_id)?;
        let digit_bits = r.u32()?;
        let digits_per_prime = r.u32()? as usize;
        let count = r.u32()? as usize;
        let q = self.q_values();
        if digit_bits != self.params.relin_digit_bits || count != digits_per_prime * q.len() {
            return Err(HeError::Malformed("relinearization key shape".into()));
        }
        let mut keys = Vec::with_capacity(count);
        for _ in 0..count {
            let b = r.poly(&q, self.n())?;
            let a = r.poly(&q, self.n())?;
            keys.push((b, a));
        }
        r.finish()?;
        Ok(RelinKey {
            ring_id: self.ring_id,
            digit_bits,
            digits_per_prime,
            keys,
        })
    }
}
