//! The two workloads: linkage-disequilibrium chi-square testing and
//! logistic-regression inference, each as a plaintext oracle, a Boolean
//! circuit and (for LD) a BFV computation plan.

mod error;
pub mod io;
pub mod ld;
pub mod ld_circuit;
pub mod ld_he;
pub mod lr;
pub mod sigmoid;
pub mod synth;

pub use error::{AnalyticsError, Result};
pub use ld::{
    allele_frequencies, chi_square_f64, genotype_to_allele_counts, ld_decide_plain, ld_difference, GenotypeCounts,
    HaplotypeCounts, LdResult, LdThreshold,
};
pub use ld_circuit::{build_ld_circuit, build_ld_circuit_multi, encode_ld_inputs};
pub use ld_he::{LdHeDecision, LdHeListing, LdHeOutput, LdHePlan};
pub use lr::{build_lr_circuit, build_lr_circuit_multi, encode_lr_inputs, lr_predict_float, lr_predict_plain, quantize_features, LrModel, LrPrediction};
pub use sigmoid::{build_sigmoid_table, sigmoid, SigmoidTable};
