//! Textbook BFV over `Z_Q[X]/(X^n + 1)` with an RNS coefficient modulus.
//!
//! Desk-scale and not production-audited: no lattice security estimate is
//! performed, and parameters are chosen for correctness at the depths the
//! analytics workloads need.

mod context;
mod crt;
mod encoding;
mod error;
mod keys;
pub mod modarith;
pub mod ntt;
mod ops;
mod params;
mod ring;
mod serialize;

pub use context::HeContext;
pub use crt::crt_combine;
pub use encoding::{Encoding, Plaintext};
pub use error::{HeError, Result};
pub use keys::{keygen, keygen_seeded, PublicKey, RelinKey, SecretKey};
pub use ops::HeCiphertext;
pub use params::{HeParams, PLAIN_PRIMES, PRIMES_54, PRIMES_60};
