//! Balanced clustering and anticlustering.

mod anticluster;
mod kmeans;

pub use anticluster::{anticluster_exchange, improve as anticluster_improve, within_group_sse};
pub use kmeans::{balanced_capacities, balanced_kmeans, clustering_objective, BalancedKMeansResult, KMeansOptions};
