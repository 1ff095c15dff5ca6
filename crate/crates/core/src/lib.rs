//! Wasserstein homogeneity partitioning.
//!
//! Splits a finite sample into equal-size subgroups whose empirical
//! distributions are as close as possible, in squared Wasserstein-2
//! distance, to the whole sample. The toolkit bundles the exact transport
//! solvers, balanced k-means, barycenters, the partitioners and baselines,
//! and diagnostics used to compare them.

pub mod barycenter;
pub mod clustering;
pub mod combinatorics;
pub mod data;
pub mod error;
pub mod graphs;
pub mod metrics;
pub mod oracle;
pub mod partition;
pub mod partitioners;
pub mod rng;
pub mod stats;
pub mod transport;

pub use data::Dataset;
pub use error::{Error, Result};
pub use partition::{random_balanced_assignment, Partition};
pub use partitioners::{partition_subgroups, Method, PartitionerConfig, SubgroupRequest};
pub use rng::Rng;
