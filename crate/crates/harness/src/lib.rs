//! Experiment harness for the `whomp` partitioning toolkit: synthetic
//! generators, repeated-trial runners, downstream models, the property
//! suite and report output.

pub mod audit;
pub mod config;
pub mod experiments;
pub mod generators;
pub mod manifest;
pub mod models;
pub mod suite;
pub mod table;

pub use config::{ExperimentConfig, ExperimentKind, Scale};
pub use experiments::{
    run_csv_w2, run_embedding_entropy, run_gmm_downstream, run_gmm_w2, run_sbm_spectra, run_table,
};
pub use suite::{run_property_suite, SuiteOptions, SuiteReport};
pub use table::{TrialRow, TrialTable};
