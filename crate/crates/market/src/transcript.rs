//! Session transcripts: one record per frame put on the wire.

use std::fmt::Write as _;
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::error::{MarketError, Result};
use crate::message::MessageType;
use crate::role::Role;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub sender: Role,
    pub receiver: Role,
    pub ty: MessageType,
    /// Encoded frame size including the length prefix.
    pub bytes: usize,
    /// Time since the session started. Not reproducible.
    pub timestamp: Duration,
    /// SHA-256 of the encoded frame.
    pub digest: [u8; 32],
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    pub session: u64,
    pub entries: Vec<TranscriptEntry>,
    /// Raw frames that reached the data trust, kept for auditing.
    pub datatrust_frames: Vec<Vec<u8>>,
}

impl Transcript {
    pub fn new(session: u64) -> Self {
        Self {
            session,
            ..Self::default()
        }
    }

    pub fn record(&mut self, frame: &[u8], ty: MessageType, sender: Role, receiver: Role, timestamp: Duration) {
        self.entries.push(TranscriptEntry {
            sender,
            receiver,
            ty,
            bytes: frame.len(),
            timestamp,
            digest: Sha256::digest(frame).into(),
        });
        if matches!(receiver, Role::DataTrust | Role::Broadcast) {
            self.datatrust_frames.push(frame.to_vec());
        }
    }

    pub fn type_sequence(&self) -> Vec<MessageType> {
        self.entries.iter().map(|e| e.ty).collect()
    }

    pub fn total_bytes(&self) -> usize {
        self.entries.iter().map(|e| e.bytes).sum()
    }

    pub fn bytes_of(&self, types: &[MessageType]) -> usize {
        self.entries.iter().filter(|e| types.contains(&e.ty)).map(|e| e.bytes).sum()
    }

    /// Types that the data trust received, directly or by broadcast.
    pub fn received_by_datatrust(&self) -> Vec<MessageType> {
        self.entries
            .iter()
            .filter(|e| matches!(e.receiver, Role::DataTrust | Role::Broadcast))
            .map(|e| e.ty)
            .collect()
    }

    /// Everything except timestamps.
    pub fn same_traffic(&self, other: &Transcript) -> bool {
        self.entries.len() == other.entries.len()
            && self.entries.iter().zip(&other.entries).all(|(a, b)| {
                (a.sender, a.receiver, a.ty, a.bytes, a.digest) == (b.sender, b.receiver, b.ty, b.bytes, b.digest)
            })
    }

    /// Line-delimited `key=value` records.
    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let digest: String = e.digest.iter().map(|b| format!("{b:02x}")).collect();
            writeln!(
                s,
                "session={:#x} sender={} receiver={} type={} bytes={} t_us={} sha256={}",
                self.session,
                e.sender,
                e.receiver,
                e.ty.name(),
                e.bytes,
                e.timestamp.as_micros(),
                digest
            )
            .unwrap();
        }
        s
    }

    pub fn from_lines(text: &str) -> Result<Self> {
        let mut t = Transcript::default();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = |m: &str| MarketError::Malformed(format!("transcript line {}: {m}", i + 1));
            let get = |key: &str| -> Result<&str> {
                line.split_whitespace()
                    .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                    .ok_or_else(|| bad(&format!("missing {key}")))
            };
            let session = get("session")?;
            t.session = u64::from_str_radix(session.trim_start_matches("0x"), 16).map_err(|_| bad("session"))?;
            let sender = get("sender")?.parse()?;
            let receiver = get("receiver")?.parse()?;
            let ty = MessageType::from_name(get("type")?)?;
            let bytes = get("bytes")?.parse().map_err(|_| bad("bytes"))?;
            let t_us: u64 = get("t_us")?.parse().map_err(|_| bad("t_us"))?;
            let hex = get("sha256")?;
            if hex.len() != 64 {
                return Err(bad("sha256"));
            }
            let mut digest = [0u8; 32];
            for (k, d) in digest.iter_mut().enumerate() {
                *d = u8::from_str_radix(&hex[2 * k..2 * k + 2], 16).map_err(|_| bad("sha256"))?;
            }
            t.entries.push(TranscriptEntry {
                sender,
                receiver,
                ty,
                bytes,
                timestamp: Duration::from_micros(t_us),
                digest,
            });
        }
        Ok(t)
    }
}
