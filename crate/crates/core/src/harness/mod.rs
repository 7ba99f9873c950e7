//! Verification and reproduction tooling.

pub mod chain;
pub mod experiment;
pub mod fixed_point;
pub mod generators;
pub mod verify;

pub use chain::{build_truncated_chain, default_radius, stationarity_residual, TruncatedChain};
pub use experiment::{
    run_experiment, run_experiment_traced, Algorithm, ExperimentConfig, ExperimentReport,
};
pub use fixed_point::{ks_statistic, monte_carlo_fixed_point, normal_cdf};
pub use generators::{Generator, VectorStream};
pub use verify::{run_verification, Suite, VerifyReport};
