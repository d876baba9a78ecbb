//! Wire framing: 4-byte big-endian length, then message type, session id,
//! sequence number, sender and receiver roles, and the payload. The
//! length counts everything after itself.

use std::collections::HashMap;
use std::io::{ErrorKind, Read, Write};

use crate::error::{MarketError, Result};
use crate::message::{MessageType, ProtocolMessage};
use crate::role::Role;

pub const HEADER_LEN: usize = 1 + 8 + 8 + 2 * Role::ENCODED_LEN;
pub const MAX_FRAME: usize = 1 << 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub ty: MessageType,
    pub session: u64,
    pub seq: u64,
    pub from: Role,
    pub to: Role,
    pub payload: Vec<u8>,
}

impl Frame {
    /// Full encoding including the length prefix.
    pub fn encode(&self) -> Vec<u8> {
        let body = HEADER_LEN + self.payload.len();
        let mut out = Vec::with_capacity(4 + body);
        out.extend_from_slice(&(body as u32).to_be_bytes());
        out.push(self.ty.code());
        out.extend_from_slice(&self.session.to_be_bytes());
        out.extend_from_slice(&self.seq.to_be_bytes());
        out.extend_from_slice(&self.from.encode());
        out.extend_from_slice(&self.to.encode());
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parses one complete frame; the buffer must hold exactly one.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(MarketError::Malformed("truncated length prefix".into()));
        }
        let len = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
        let body = &bytes[4..];
        if len != body.len() {
            return Err(MarketError::Malformed(format!(
                "length prefix says {len} bytes, frame has {}",
                body.len()
            )));
        }
        Self::decode_body(body)
    }

    fn decode_body(body: &[u8]) -> Result<Self> {
        if body.len() < HEADER_LEN {
            return Err(MarketError::Malformed("truncated header".into()));
        }
        let ty = MessageType::from_code(body[0])?;
        let session = u64::from_be_bytes(body[1..9].try_into().unwrap());
        let seq = u64::from_be_bytes(body[9..17].try_into().unwrap());
        let from = Role::decode(&body[17..22])?;
        let to = Role::decode(&body[22..27])?;
        Ok(Self {
            ty,
            session,
            seq,
            from,
            to,
            payload: body[HEADER_LEN..].to_vec(),
        })
    }

    /// Receiver field straight from an encoded frame.
    pub fn peek_route(bytes: &[u8]) -> Result<(MessageType, Role, Role)> {
        if bytes.len() < 4 + HEADER_LEN {
            return Err(MarketError::Malformed("truncated header".into()));
        }
        let b = &bytes[4..];
        Ok((MessageType::from_code(b[0])?, Role::decode(&b[17..22])?, Role::decode(&b[22..27])?))
    }
}

/// Reads one length-prefixed frame. `Ok(None)` on a clean end of stream
/// before the first byte; anything shorter than announced is an error.
pub fn read_frame_bytes<R: Read>(r: &mut R) -> Result<Option<Vec<u8>>> {
    let mut len = [0u8; 4];
    match r.read(&mut len[..1]) {
        Ok(0) => return Ok(None),
        Ok(_) => {}
        Err(e) => return Err(io_err(e)),
    }
    r.read_exact(&mut len[1..]).map_err(io_err)?;
    let n = u32::from_be_bytes(len) as usize;
    if n > MAX_FRAME || n < HEADER_LEN {
        return Err(MarketError::Malformed(format!("frame length {n} out of range")));
    }
    let mut out = vec![0u8; 4 + n];
    out[..4].copy_from_slice(&len);
    r.read_exact(&mut out[4..]).map_err(io_err)?;
    Ok(Some(out))
}

pub fn write_frame_bytes<W: Write>(w: &mut W, frame: &[u8]) -> Result<()> {
    w.write_all(frame).map_err(io_err)
}

pub(crate) fn io_err(e: std::io::Error) -> MarketError {
    match e.kind() {
        ErrorKind::UnexpectedEof | ErrorKind::ConnectionReset | ErrorKind::BrokenPipe | ErrorKind::ConnectionAborted => {
            MarketError::ConnectionLost(e.to_string())
        }
        _ => MarketError::Io(e),
    }
}

/// Per-role framing state: stamps outgoing frames with per-link sequence
/// numbers and checks incoming ones.
#[derive(Debug, Clone)]
pub struct Endpoint {
    role: Role,
    session: u64,
    next_out: HashMap<Role, u64>,
    next_in: HashMap<(Role, Role), u64>,
}

impl Endpoint {
    pub fn new(role: Role, session: u64) -> Self {
        Self {
            role,
            session,
            next_out: HashMap::new(),
            next_in: HashMap::new(),
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn session(&self) -> u64 {
        self.session
    }

    pub fn seal(&mut self, to: Role, msg: &ProtocolMessage) -> Result<Frame> {
        let ty = msg.message_type();
        if !ty.allowed(self.role, to) {
            return Err(MarketError::ForbiddenRoute { ty, from: self.role, to });
        }
        let seq = self.next_out.entry(to).or_insert(0);
        let frame = Frame {
            ty,
            session: self.session,
            seq: *seq,
            from: self.role,
            to,
            payload: msg.encode_payload(),
        };
        *seq += 1;
        Ok(frame)
    }

    /// Validates session, addressing, route and ordering, then decodes.
    pub fn open(&mut self, bytes: &[u8]) -> Result<(Role, ProtocolMessage)> {
        let f = Frame::decode(bytes)?;
        if f.session != self.session {
            return Err(MarketError::WrongSession {
                expected: self.session,
                got: f.session,
            });
        }
        if f.to != self.role && f.to != Role::Broadcast {
            return Err(MarketError::Misdelivered { to: f.to, at: self.role });
        }
        if f.from == self.role || !f.ty.allowed(f.from, f.to) {
            return Err(MarketError::ForbiddenRoute {
                ty: f.ty,
                from: f.from,
                to: f.to,
            });
        }
        let expected = self.next_in.entry((f.from, f.to)).or_insert(0);
        if f.seq != *expected {
            return Err(MarketError::OutOfOrder {
                from: f.from,
                expected: *expected,
                got: f.seq,
            });
        }
        let msg = ProtocolMessage::decode_payload(f.ty, &f.payload)?;
        *expected += 1;
        Ok((f.from, msg))
    }
}
