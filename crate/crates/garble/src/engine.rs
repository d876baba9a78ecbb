//! Half-gates garbling over free-XOR labels with point-and-permute.
//!
//! XOR and INV gates cost nothing: the zero-label of an XOR output is the
//! XOR of the input zero-labels, and an inverter flips the zero-label by
//! delta while the evaluator just forwards its label. Each AND gate emits
//! two 128-bit rows.

use dmsc_core::{Circuit, GateKind};
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::error::{GarbleError, Result};
use crate::hash::{hash2, hash4};
use crate::label::{derive_input_label, GlobalDelta, PrfKey, WireLabel};

pub const MAGIC: [u8; 4] = *b"DMGC";
pub const VERSION: u16 = 1;
/// magic + version + circuit hash + AND count
pub const HEADER_LEN: usize = 4 + 2 + 32 + 8;
pub const ROW_BYTES: usize = 32;

/// SHA-256 over a canonical binary encoding of the circuit.
pub fn circuit_hash(c: &Circuit) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"dmsc-circuit-v1");
    h.update((c.n_inputs() as u64).to_le_bytes());
    h.update((c.n_constants() as u64).to_le_bytes());
    let consts: Vec<u8> = c.constants().iter().map(|&b| b as u8).collect();
    h.update(&consts);
    h.update((c.gates().len() as u64).to_le_bytes());
    let mut buf = Vec::with_capacity(c.gates().len() * 9);
    for g in c.gates() {
        buf.push(match g.kind {
            GateKind::Xor => 0u8,
            GateKind::And => 1,
            GateKind::Inv => 2,
        });
        buf.extend_from_slice(&g.a.to_le_bytes());
        buf.extend_from_slice(&g.b.to_le_bytes());
    }
    h.update(&buf);
    h.update((c.outputs().len() as u64).to_le_bytes());
    for w in c.outputs() {
        h.update(w.to_le_bytes());
    }
    h.finalize().into()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GarbledCircuit {
    pub circuit_hash: [u8; 32],
    /// Two rows per AND gate, in gate order.
    pub rows: Vec<[WireLabel; 2]>,
}

impl GarbledCircuit {
    pub fn serialized_len(&self) -> usize {
        HEADER_LEN + ROW_BYTES * self.rows.len()
    }

    /// Little-endian wire format: magic, version, circuit hash, AND count,
    /// then 32-byte rows.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.serialized_len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.circuit_hash);
        out.extend_from_slice(&(self.rows.len() as u64).to_le_bytes());
        for [g, e] in &self.rows {
            out.extend_from_slice(&g.to_bytes());
            out.extend_from_slice(&e.to_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(GarbleError::Malformed("truncated header".into()));
        }
        if bytes[..4] != MAGIC {
            return Err(GarbleError::Malformed("bad magic".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(GarbleError::Malformed(format!("unsupported version {version}")));
        }
        let circuit_hash: [u8; 32] = bytes[6..38].try_into().unwrap();
        let n = u64::from_le_bytes(bytes[38..46].try_into().unwrap()) as usize;
        let body = &bytes[HEADER_LEN..];
        if body.len() != n.checked_mul(ROW_BYTES).unwrap_or(usize::MAX) {
            return Err(GarbleError::Malformed(format!(
                "expected {n} rows, body has {} bytes",
                body.len()
            )));
        }
        let rows = body
            .chunks_exact(ROW_BYTES)
            .map(|r| {
                [
                    WireLabel::from_bytes(r[..16].try_into().unwrap()),
                    WireLabel::from_bytes(r[16..].try_into().unwrap()),
                ]
            })
            .collect();
        Ok(Self { circuit_hash, rows })
    }
}

/// One point-bit mask per output wire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodingInfo {
    pub masks: Vec<bool>,
}

impl DecodingInfo {
    /// `u32` little-endian count followed by the masks packed lsb-first.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = (self.masks.len() as u32).to_le_bytes().to_vec();
        out.extend(self.masks.chunks(8).map(|ch| {
            ch.iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << i))
        }));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(GarbleError::Malformed("truncated decoding info".into()));
        }
        let n = u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize;
        let body = &bytes[4..];
        if body.len() != n.div_ceil(8) {
            return Err(GarbleError::Malformed("decoding info length mismatch".into()));
        }
        let masks = (0..n).map(|i| (body[i / 8] >> (i % 8)) & 1 == 1).collect();
        Ok(Self { masks })
    }
}

/// Supplies the zero-label of every input and constant wire.
pub trait InputLabelSource {
    fn zero_label(&mut self, wire: usize) -> WireLabel;
}

/// Fresh random labels for every wire.
pub struct RandomLabels<R>(pub R);

impl<R: RngCore + CryptoRng> InputLabelSource for RandomLabels<R> {
    fn zero_label(&mut self, _wire: usize) -> WireLabel {
        WireLabel::random(&mut self.0)
    }
}

/// Party input wires take PRF-derived labels (so makers can compute their
/// own); constant wires get fresh randomness from the garbler.
pub struct PrfLabels<'a, R> {
    pub key: &'a PrfKey,
    /// PRF message for each party input wire, indexed by wire id.
    pub messages: &'a [u128],
    pub rng: R,
}

impl<R: RngCore + CryptoRng> InputLabelSource for PrfLabels<'_, R> {
    fn zero_label(&mut self, wire: usize) -> WireLabel {
        match self.messages.get(wire) {
            Some(&m) => derive_input_label(self.key, m),
            None => WireLabel::random(&mut self.rng),
        }
    }
}

/// Everything the garbler produces for one circuit.
#[derive(Debug, Clone)]
pub struct Garbling {
    pub garbled: GarbledCircuit,
    pub decoding: DecodingInfo,
    /// Zero-labels of the party input wires (garbler-side only).
    pub input_zero_labels: Vec<WireLabel>,
    /// Active labels of the constant wires, shipped with the circuit.
    pub constant_labels: Vec<WireLabel>,
}

#[inline]
fn tweaks(and_index: usize) -> (u64, u64) {
    let j = 2 * and_index as u64;
    (j, j + 1)
}

pub fn garble(
    circuit: &Circuit,
    delta: GlobalDelta,
    source: &mut dyn InputLabelSource,
) -> Result<Garbling> {
    circuit.validate()?;
    let d = delta.label();
    let n_in = circuit.n_inputs();
    let first = circuit.first_gate_wire();
    let mut zero: Vec<WireLabel> = Vec::with_capacity(circuit.n_wires());
    for w in 0..first {
        zero.push(source.zero_label(w));
    }
    let constant_labels = circuit
        .constants()
        .iter()
        .enumerate()
        .map(|(i, &v)| zero[n_in + i] ^ d.select(v))
        .collect();

    let mut rows = Vec::with_capacity(circuit.and_count());
    for g in circuit.gates() {
        let a0 = zero[g.a as usize];
        let out = match g.kind {
            GateKind::Xor => a0 ^ zero[g.b as usize],
            GateKind::Inv => a0 ^ d,
            GateKind::And => {
                let b0 = zero[g.b as usize];
                let (j0, j1) = tweaks(rows.len());
                let pa = a0.point();
                let pb = b0.point();
                let [ha0, ha1, hb0, hb1] = hash4([a0, a0 ^ d, b0, b0 ^ d], [j0, j0, j1, j1]);
                // Garbler half: the garbler knows pb.
                let tg = ha0 ^ ha1 ^ d.select(pb);
                let wg = ha0 ^ tg.select(pa);
                // Evaluator half: the evaluator knows b ^ pb.
                let te = hb0 ^ hb1 ^ a0;
                let we = hb0 ^ (te ^ a0).select(pb);
                rows.push([tg, te]);
                wg ^ we
            }
        };
        zero.push(out);
    }

    let decoding = DecodingInfo {
        masks: circuit.outputs().iter().map(|&w| zero[w as usize].point()).collect(),
    };
    zero.truncate(n_in);
    Ok(Garbling {
        garbled: GarbledCircuit {
            circuit_hash: circuit_hash(circuit),
            rows,
        },
        decoding,
        input_zero_labels: zero,
        constant_labels,
    })
}

/// Evaluates with one active label per input wire followed by one per
/// constant wire. Only the rows selected by point bits are touched.
pub fn evaluate(
    garbled: &GarbledCircuit,
    circuit: &Circuit,
    active: &[WireLabel],
) -> Result<Vec<WireLabel>> {
    let first = circuit.first_gate_wire();
    if active.len() != first {
        return Err(GarbleError::LabelCount {
            expected: first,
            got: active.len(),
        });
    }
    if garbled.circuit_hash != circuit_hash(circuit) {
        return Err(GarbleError::HashMismatch);
    }
    let n_and = circuit.and_count();
    if garbled.rows.len() != n_and {
        return Err(GarbleError::RowCount {
            expected: n_and,
            got: garbled.rows.len(),
        });
    }
    let mut wires: Vec<WireLabel> = Vec::with_capacity(circuit.n_wires());
    wires.extend_from_slice(active);
    let mut k = 0usize;
    for g in circuit.gates() {
        let a = wires[g.a as usize];
        let out = match g.kind {
            GateKind::Xor => a ^ wires[g.b as usize],
            GateKind::Inv => a,
            GateKind::And => {
                let b = wires[g.b as usize];
                let [tg, te] = garbled.rows[k];
                let (j0, j1) = tweaks(k);
                k += 1;
                let (ha, hb) = hash2(a, j0, b, j1);
                let wg = ha ^ tg.select(a.point());
                let we = hb ^ (te ^ a).select(b.point());
                wg ^ we
            }
        };
        wires.push(out);
    }
    Ok(circuit.outputs().iter().map(|&w| wires[w as usize]).collect())
}

/// `bit_i = lsb(label_i) ^ mask_i`.
pub fn decode(info: &DecodingInfo, labels: &[WireLabel]) -> Result<Vec<bool>> {
    if info.masks.len() != labels.len() {
        return Err(GarbleError::LabelCount {
            expected: info.masks.len(),
            got: labels.len(),
        });
    }
    Ok(labels
        .iter()
        .zip(&info.masks)
        .map(|(l, &m)| l.point() ^ m)
        .collect())
}

/// Active input labels for plaintext bits, given the garbler's zero-labels.
pub fn encode_inputs(zero_labels: &[WireLabel], delta: GlobalDelta, bits: &[bool]) -> Result<Vec<WireLabel>> {
    if zero_labels.len() != bits.len() {
        return Err(GarbleError::LabelCount {
            expected: zero_labels.len(),
            got: bits.len(),
        });
    }
    Ok(zero_labels
        .iter()
        .zip(bits)
        .map(|(&z, &b)| z ^ delta.label().select(b))
        .collect())
}
