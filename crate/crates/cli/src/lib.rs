//! Command-line driver for the data-market protocols: synthetic data,
//! BFV keys, end-to-end runs with oracle verification, circuit inspection
//! and benchmark sweeps.

pub mod app;
pub mod config;
pub mod error;
pub mod gen;
pub mod inspect;
pub mod report;
pub mod run;

pub use app::main_with;
pub use config::{RunConfig, Settings, Workload};
pub use error::{CliError, EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_VERIFY};
