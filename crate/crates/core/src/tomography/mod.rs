//! State reconstruction from homodyne records: the pattern-function
//! estimator, maximum likelihood with an efficiency-aware POVM, loss maps
//! and bootstrap error bars.

mod bootstrap;
mod loss;
mod ml;
mod pattern;
mod pf;
mod povm;
mod report;

pub use bootstrap::{bootstrap_uncertainty, BellSpread, BootstrapConfig, BootstrapReport, Estimator, Spread};
pub use loss::{auto_efficiency, bernoulli_map, inverse_bernoulli, EtaSource, InverseBernoulli};
pub use ml::{ml_estimate, ml_estimate_binned, BinSpec, MLConfig, MlResult, MlStatus, MONOTONE_SLACK, UNDERFLOW_PROBABILITY};
pub use pattern::{pattern_function, pattern_profile, PatternFunctionTable, DEFAULT_TABLE_RANGE, DEFAULT_TABLE_STEP};
pub use pf::{pf_estimate, pf_estimate_with_table, PfEstimate};
pub use povm::{povm_element, SingleModePovm};
pub use report::{CorrectionReport, Method, ReconstructionReport};
