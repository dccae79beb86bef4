//! Exact simulation of cost minimization by post-selected measurement, with
//! the bound checks showing it never beats uniform random sampling, and
//! classical and amplitude-amplification baselines for comparison.
//!
//! Module map:
//! - [`statevec`]: data ⊗ ancilla pure states, marginals, post-selection, sampling
//! - [`costfn`]: tabulated cost instances, generators, file formats
//! - [`encoding`]: cost-to-amplitude encoders and the entangling step
//! - [`algorithm`]: exact analysis and the repeat-until-success loop
//! - [`baselines`]: random search, hill climbing, amplitude amplification
//! - [`verify`], [`sweep`]: bundled checks and randomized configuration sweeps
//! - [`cli`]: command-line front end and report writer

pub mod algorithm;
pub mod baselines;
pub mod cli;
pub mod costfn;
pub mod encoding;
pub mod error;
pub mod statevec;
pub mod sweep;
pub mod verify;

pub use algorithm::{
    chain_decomposition, exact_analysis, per_state_product, run_repeat_until_success,
    sequential_vs_joint_check, ChainDecomposition, ExactAnalysis, RunConfig, StopRule, TrialStats,
};
pub use baselines::{
    amplitude_amplification_success, grover_simulate, hill_climb, optimal_iterations, random_search,
    SearchResult,
};
pub use costfn::{CostInstance, Generator, GeneratorKind, Provenance};
pub use encoding::{encode, success_amplitude, AmplitudeEncoder, JunkPolicy};
pub use error::{Error, Result};
pub use statevec::{MeasureTarget, OutcomeDistribution, Register, RegisterLayout, StateVector};
