//! Boolean circuit IR shared by the garbling engine and the plaintext
//! evaluator, plus composable builders for the integer and fixed-point
//! arithmetic the workloads need.

pub mod bits;
pub mod builder;
pub mod builders;
pub mod circuit;
pub mod error;
pub mod eval;
pub mod fixed;
pub mod format;

pub use builder::{Bit, CircuitBuilder, Word};
pub use builders::{build_adder, build_greater_than, build_lookup, build_multiplier};
pub use circuit::{Circuit, Gate, GateKind, GateStats, Group, WireId};
pub use error::{CircuitError, Result};
pub use eval::{eval_plain, eval_plain_sliced};
pub use fixed::FixedPointSpec;
