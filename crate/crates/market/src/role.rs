use std::fmt;

use crate::error::{MarketError, Result};

/// Protocol participant. `Broadcast` only ever appears as a receiver and
/// stands for every other role in the session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Csp,
    DataTrust,
    Maker(u32),
    Buyer(u32),
    Broadcast,
}

impl Role {
    pub const ENCODED_LEN: usize = 5;

    pub fn kind(self) -> RoleKind {
        match self {
            Role::Csp => RoleKind::Csp,
            Role::DataTrust => RoleKind::DataTrust,
            Role::Maker(_) => RoleKind::Maker,
            Role::Buyer(_) => RoleKind::Buyer,
            Role::Broadcast => RoleKind::Broadcast,
        }
    }

    pub fn encode(self) -> [u8; 5] {
        let (k, i) = match self {
            Role::Csp => (0u8, 0u32),
            Role::DataTrust => (1, 0),
            Role::Maker(i) => (2, i),
            Role::Buyer(i) => (3, i),
            Role::Broadcast => (4, 0),
        };
        let mut out = [0u8; 5];
        out[0] = k;
        out[1..].copy_from_slice(&i.to_be_bytes());
        out
    }

    pub fn decode(b: &[u8]) -> Result<Self> {
        let b: [u8; 5] = b
            .try_into()
            .map_err(|_| MarketError::Malformed("role field must be 5 bytes".into()))?;
        let i = u32::from_be_bytes([b[1], b[2], b[3], b[4]]);
        let role = match (b[0], i) {
            (0, 0) => Role::Csp,
            (1, 0) => Role::DataTrust,
            (2, i) => Role::Maker(i),
            (3, i) => Role::Buyer(i),
            (4, 0) => Role::Broadcast,
            _ => return Err(MarketError::Malformed(format!("bad role {b:?}"))),
        };
        Ok(role)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Csp => f.write_str("csp"),
            Role::DataTrust => f.write_str("datatrust"),
            Role::Maker(i) => write!(f, "maker{i}"),
            Role::Buyer(i) => write!(f, "buyer{i}"),
            Role::Broadcast => f.write_str("broadcast"),
        }
    }
}

impl std::str::FromStr for Role {
    type Err = MarketError;

    fn from_str(s: &str) -> Result<Self> {
        let idx = |rest: &str| rest.parse::<u32>().map_err(|_| MarketError::Malformed(format!("bad role `{s}`")));
        match s {
            "csp" => Ok(Role::Csp),
            "datatrust" => Ok(Role::DataTrust),
            "broadcast" => Ok(Role::Broadcast),
            _ if s.starts_with("maker") => Ok(Role::Maker(idx(&s[5..])?)),
            _ if s.starts_with("buyer") => Ok(Role::Buyer(idx(&s[5..])?)),
            _ => Err(MarketError::Malformed(format!("bad role `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoleKind {
    Csp,
    DataTrust,
    Maker,
    Buyer,
    Broadcast,
}
