//! Sup-Wald tests for a structural break in predictive regressions with
//! persistent regressors.
//!
//! The crate covers simulation of local-to-unity and mildly integrated
//! regressors, OLS and IVX based break scans, simulated critical values for
//! the limiting functionals, and Monte Carlo size and power experiments.

pub mod breaktest;
pub mod cli;
pub mod dgp;
pub mod harness;
pub mod ivx;
pub mod kernels;
pub mod limitdist;
pub mod rng;

pub use breaktest::{scan, wald_ivx_at, wald_ols_at, ScanConfig, StatisticKind, WaldScan};
pub use dgp::{simulate_sample, BreakDgp, InnovationLaw, RegressorLaw, Sample};
pub use harness::{run_moment_check, run_power, run_size, Experiment, ExperimentResult};
pub use ivx::{build_instruments, IvxConfig};
pub use kernels::{partitioned_inverse, Mat};
pub use limitdist::{build_table, CriticalValueTable, FunctionalKind, FunctionalSpec};
