//! Transcript audits for what the data trust may see.

use crate::message::MessageType;
use crate::transcript::Transcript;

/// Schema-level check: no message type that can reach the data trust is
/// able to carry a plaintext result, label meanings, or garbling secrets.
/// Returns the offending types.
pub fn datatrust_schema_violations() -> Vec<MessageType> {
    MessageType::ALL
        .into_iter()
        .filter(|t| t.reaches_datatrust())
        .filter(|t| t.carries_plaintext() || t.carries_garbling_secret() || *t == MessageType::DecryptRequest)
        .collect()
}

/// Runtime check over a transcript. `secrets` are byte strings (delta, PRF
/// key, a secret-key fingerprint) that must not occur in any frame the data
/// trust received. Returns human-readable violations.
pub fn audit_datatrust(transcript: &Transcript, secrets: &[Vec<u8>]) -> Vec<String> {
    let mut v = Vec::new();
    for ty in transcript.received_by_datatrust() {
        if ty.carries_plaintext() || ty.carries_garbling_secret() || ty == MessageType::DecryptRequest {
            v.push(format!("data trust received {}", ty.name()));
        }
    }
    for (i, frame) in transcript.datatrust_frames.iter().enumerate() {
        for s in secrets.iter().filter(|s| s.len() >= 8) {
            if frame.windows(s.len()).any(|w| w == s.as_slice()) {
                v.push(format!("data trust frame {i} contains secret material"));
            }
        }
    }
    v
}

/// Every recorded type is one of the protocol's own; the schema has no
/// oblivious-transfer messages, so any foreign type would be one.
pub fn foreign_types(transcript: &Transcript) -> usize {
    transcript
        .entries
        .iter()
        .filter(|e| !MessageType::ALL.contains(&e.ty))
        .count()
}
