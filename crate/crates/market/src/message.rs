//! Message schema. Each variant belongs to exactly one protocol step and
//! has a fixed route; there is no variant for oblivious transfer.

use crate::error::{MarketError, Result};
use crate::role::{Role, RoleKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum MessageType {
    PublicKeyDist = 1,
    EncryptedListing = 2,
    Query = 3,
    ListingBundle = 4,
    DecryptRequest = 5,
    Result = 6,
    DeltaKeyDist = 7,
    InputLabels = 8,
    GarbledCircuit = 9,
    OutputLabels = 10,
    OutputDecoding = 11,
}

impl MessageType {
    pub const ALL: [MessageType; 11] = [
        MessageType::PublicKeyDist,
        MessageType::EncryptedListing,
        MessageType::Query,
        MessageType::ListingBundle,
        MessageType::DecryptRequest,
        MessageType::Result,
        MessageType::DeltaKeyDist,
        MessageType::InputLabels,
        MessageType::GarbledCircuit,
        MessageType::OutputLabels,
        MessageType::OutputDecoding,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(c: u8) -> Result<Self> {
        Self::ALL
            .get((c as usize).wrapping_sub(1))
            .copied()
            .ok_or_else(|| MarketError::Malformed(format!("unknown message type {c}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            MessageType::PublicKeyDist => "PublicKeyDist",
            MessageType::EncryptedListing => "EncryptedListing",
            MessageType::Query => "Query",
            MessageType::ListingBundle => "ListingBundle",
            MessageType::DecryptRequest => "DecryptRequest",
            MessageType::Result => "Result",
            MessageType::DeltaKeyDist => "DeltaKeyDist",
            MessageType::InputLabels => "InputLabels",
            MessageType::GarbledCircuit => "GarbledCircuitMsg",
            MessageType::OutputLabels => "OutputLabels",
            MessageType::OutputDecoding => "OutputDecoding",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| MarketError::Malformed(format!("unknown message type `{s}`")))
    }

    /// `(sender, receiver)` kinds this type may travel between.
    pub fn routes(self) -> &'static [(RoleKind, RoleKind)] {
        use RoleKind::*;
        match self {
            MessageType::PublicKeyDist => &[(Csp, Broadcast)],
            MessageType::EncryptedListing | MessageType::InputLabels => &[(Maker, DataTrust)],
            MessageType::Query => &[(Buyer, DataTrust), (Buyer, Csp)],
            MessageType::ListingBundle => &[(DataTrust, Buyer)],
            MessageType::DecryptRequest | MessageType::OutputLabels => &[(Buyer, Csp)],
            MessageType::Result | MessageType::GarbledCircuit | MessageType::OutputDecoding => &[(Csp, Buyer)],
            MessageType::DeltaKeyDist => &[(Csp, Maker)],
        }
    }

    pub fn allowed(self, from: Role, to: Role) -> bool {
        self.routes().contains(&(from.kind(), to.kind()))
    }

    /// Types that can reach the data trust, directly or by broadcast.
    pub fn reaches_datatrust(self) -> bool {
        self.routes()
            .iter()
            .any(|&(_, to)| matches!(to, RoleKind::DataTrust | RoleKind::Broadcast))
    }

    /// Types whose payload can carry a plaintext result or label meaning.
    pub fn carries_plaintext(self) -> bool {
        matches!(self, MessageType::Result | MessageType::OutputDecoding)
    }

    /// Types whose payload carries the garbling secrets.
    pub fn carries_garbling_secret(self) -> bool {
        matches!(self, MessageType::DeltaKeyDist)
    }
}

/// One maker's contribution inside a bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Listing {
    pub maker: u32,
    pub items: Vec<Vec<u8>>,
}

pub type LabelBytes = [u8; 16];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProtocolMessage {
    PublicKeyDist { public_key: Vec<u8>, relin_key: Vec<u8> },
    EncryptedListing { maker: u32, ciphertexts: Vec<Vec<u8>> },
    Query { buyer: u32, computation: String },
    /// Ciphertexts (HE path) or active input labels (GC path).
    ListingBundle { listings: Vec<Listing> },
    DecryptRequest { slots: u32, ciphertexts: Vec<Vec<u8>> },
    Result { values: Vec<Vec<u64>> },
    /// Sent over a channel assumed secure; frames carry no session key.
    DeltaKeyDist { delta: LabelBytes, key: LabelBytes },
    InputLabels { maker: u32, labels: Vec<LabelBytes> },
    GarbledCircuit { circuit: Vec<u8>, constant_labels: Vec<LabelBytes> },
    OutputLabels { labels: Vec<LabelBytes> },
    OutputDecoding { bits: Vec<bool> },
}

impl ProtocolMessage {
    pub fn message_type(&self) -> MessageType {
        match self {
            ProtocolMessage::PublicKeyDist { .. } => MessageType::PublicKeyDist,
            ProtocolMessage::EncryptedListing { .. } => MessageType::EncryptedListing,
            ProtocolMessage::Query { .. } => MessageType::Query,
            ProtocolMessage::ListingBundle { .. } => MessageType::ListingBundle,
            ProtocolMessage::DecryptRequest { .. } => MessageType::DecryptRequest,
            ProtocolMessage::Result { .. } => MessageType::Result,
            ProtocolMessage::DeltaKeyDist { .. } => MessageType::DeltaKeyDist,
            ProtocolMessage::InputLabels { .. } => MessageType::InputLabels,
            ProtocolMessage::GarbledCircuit { .. } => MessageType::GarbledCircuit,
            ProtocolMessage::OutputLabels { .. } => MessageType::OutputLabels,
            ProtocolMessage::OutputDecoding { .. } => MessageType::OutputDecoding,
        }
    }

    pub fn encode_payload(&self) -> Vec<u8> {
        let mut w = Writer::default();
        match self {
            ProtocolMessage::PublicKeyDist { public_key, relin_key } => {
                w.bytes(public_key);
                w.bytes(relin_key);
            }
            ProtocolMessage::EncryptedListing { maker, ciphertexts } => {
                w.u32(*maker);
                w.blobs(ciphertexts);
            }
            ProtocolMessage::Query { buyer, computation } => {
                w.u32(*buyer);
                w.bytes(computation.as_bytes());
            }
            ProtocolMessage::ListingBundle { listings } => {
                w.u32(listings.len() as u32);
                for l in listings {
                    w.u32(l.maker);
                    w.blobs(&l.items);
                }
            }
            ProtocolMessage::DecryptRequest { slots, ciphertexts } => {
                w.u32(*slots);
                w.blobs(ciphertexts);
            }
            ProtocolMessage::Result { values } => {
                w.u32(values.len() as u32);
                for v in values {
                    w.u32(v.len() as u32);
                    v.iter().for_each(|&x| w.u64(x));
                }
            }
            ProtocolMessage::DeltaKeyDist { delta, key } => {
                w.raw(delta);
                w.raw(key);
            }
            ProtocolMessage::InputLabels { maker, labels } => {
                w.u32(*maker);
                w.labels(labels);
            }
            ProtocolMessage::GarbledCircuit { circuit, constant_labels } => {
                w.bytes(circuit);
                w.labels(constant_labels);
            }
            ProtocolMessage::OutputLabels { labels } => w.labels(labels),
            ProtocolMessage::OutputDecoding { bits } => {
                w.u32(bits.len() as u32);
                for ch in bits.chunks(8) {
                    w.raw(&[ch.iter().enumerate().fold(0u8, |a, (i, &b)| a | ((b as u8) << i))]);
                }
            }
        }
        w.0
    }

    pub fn decode_payload(ty: MessageType, payload: &[u8]) -> Result<Self> {
        let mut r = Reader(payload);
        let msg = match ty {
            MessageType::PublicKeyDist => ProtocolMessage::PublicKeyDist {
                public_key: r.bytes()?,
                relin_key: r.bytes()?,
            },
            MessageType::EncryptedListing => ProtocolMessage::EncryptedListing {
                maker: r.u32()?,
                ciphertexts: r.blobs()?,
            },
            MessageType::Query => ProtocolMessage::Query {
                buyer: r.u32()?,
                computation: String::from_utf8(r.bytes()?)
                    .map_err(|_| MarketError::Malformed("computation id is not UTF-8".into()))?,
            },
            MessageType::ListingBundle => {
                let n = r.count(8)?;
                let mut listings = Vec::with_capacity(n);
                for _ in 0..n {
                    listings.push(Listing {
                        maker: r.u32()?,
                        items: r.blobs()?,
                    });
                }
                ProtocolMessage::ListingBundle { listings }
            }
            MessageType::DecryptRequest => ProtocolMessage::DecryptRequest {
                slots: r.u32()?,
                ciphertexts: r.blobs()?,
            },
            MessageType::Result => {
                let n = r.count(4)?;
                let mut values = Vec::with_capacity(n);
                for _ in 0..n {
                    let k = r.count(8)?;
                    values.push((0..k).map(|_| r.u64()).collect::<Result<_>>()?);
                }
                ProtocolMessage::Result { values }
            }
            MessageType::DeltaKeyDist => ProtocolMessage::DeltaKeyDist {
                delta: r.label()?,
                key: r.label()?,
            },
            MessageType::InputLabels => ProtocolMessage::InputLabels {
                maker: r.u32()?,
                labels: r.labels()?,
            },
            MessageType::GarbledCircuit => ProtocolMessage::GarbledCircuit {
                circuit: r.bytes()?,
                constant_labels: r.labels()?,
            },
            MessageType::OutputLabels => ProtocolMessage::OutputLabels { labels: r.labels()? },
            MessageType::OutputDecoding => {
                let n = r.u32()? as usize;
                let packed = r.take(n.div_ceil(8))?;
                ProtocolMessage::OutputDecoding {
                    bits: (0..n).map(|i| (packed[i / 8] >> (i % 8)) & 1 == 1).collect(),
                }
            }
        };
        if !r.0.is_empty() {
            return Err(MarketError::Malformed(format!("{} trailing bytes in {}", r.0.len(), ty.name())));
        }
        Ok(msg)
    }
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn raw(&mut self, b: &[u8]) {
        self.0.extend_from_slice(b);
    }
    fn u32(&mut self, v: u32) {
        self.raw(&v.to_be_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.raw(&v.to_be_bytes());
    }
    fn bytes(&mut self, b: &[u8]) {
        self.u32(b.len() as u32);
        self.raw(b);
    }
    fn blobs(&mut self, v: &[Vec<u8>]) {
        self.u32(v.len() as u32);
        v.iter().for_each(|b| self.bytes(b));
    }
    fn labels(&mut self, v: &[LabelBytes]) {
        self.u32(v.len() as u32);
        v.iter().for_each(|l| self.raw(l));
    }
}

struct Reader<'a>(&'a [u8]);

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.0.len() < n {
            return Err(MarketError::Malformed("payload truncated".into()));
        }
        let (h, t) = self.0.split_at(n);
        self.0 = t;
        Ok(h)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }
    /// Element count, bounded by what the remaining bytes could hold.
    fn count(&mut self, min_elem: usize) -> Result<usize> {
        let n = self.u32()? as usize;
        if n.saturating_mul(min_elem) > self.0.len() {
            return Err(MarketError::Malformed("element count exceeds payload".into()));
        }
        Ok(n)
    }
    fn bytes(&mut self) -> Result<Vec<u8>> {
        let n = self.u32()? as usize;
        Ok(self.take(n)?.to_vec())
    }
    fn blobs(&mut self) -> Result<Vec<Vec<u8>>> {
        let n = self.count(4)?;
        (0..n).map(|_| self.bytes()).collect()
    }
    fn label(&mut self) -> Result<LabelBytes> {
        Ok(self.take(16)?.try_into().unwrap())
    }
    fn labels(&mut self) -> Result<Vec<LabelBytes>> {
        let n = self.count(16)?;
        (0..n).map(|_| self.label()).collect()
    }
}
