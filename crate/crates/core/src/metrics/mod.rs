//! Diagnostics for evaluating subgroup partitions.

mod ate;
mod entropy;
mod lipschitz;
mod report;

pub use ate::{
    ate_randomization_test, ate_variance_bound_check, difference_in_means, AteTestResult, PartitionSampler, QpSampler,
    UniformSampler, VarianceBoundCheck,
};
pub use entropy::{normalized_entropy, sample_entropy};
pub use lipschitz::{lipschitz_discrepancy, lipschitz_discrepancy_with_anchors, lipschitz_gap};
pub use report::{homogeneity_report, HomogeneityReport};
