//! Garbling engine: free-XOR, point-and-permute and half-gates, with
//! OT-free input labels derived from a shared PRF key and global delta.

pub mod engine;
pub mod error;
pub mod hash;
pub mod label;

pub use engine::{
    circuit_hash, decode, encode_inputs, evaluate, garble, DecodingInfo, GarbledCircuit, Garbling,
    InputLabelSource, PrfLabels, RandomLabels, HEADER_LEN, ROW_BYTES,
};
pub use error::{GarbleError, Result};
pub use label::{
    derive_delta, derive_input_label, maker_active_label, maker_wire_message, GlobalDelta, PrfKey,
    WireLabel,
};
