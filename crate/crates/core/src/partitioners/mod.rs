//! Subgroup partitioners: the two WHOMP variants and the baselines they
//! are compared against.

mod pocock;
mod qp;
mod whomp;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::barycenter::BarycenterOptions;
use crate::clustering::{anticluster_exchange, KMeansOptions};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::partition::{random_balanced_assignment, Partition};
use crate::rng::Rng;

pub use pocock::{pocock_simon, quantile_bins, PocockSimonConfig};
pub use qp::{enumerate_qp, qp_count, QpIter};
pub use whomp::{deal_from_clusters, subgroups_from_barycenter, whomp_matching, whomp_random, WhompOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    WhompRandom,
    WhompMatching,
    Random,
    CovariateAdaptive,
    Anticluster,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::WhompRandom,
        Method::WhompMatching,
        Method::Random,
        Method::CovariateAdaptive,
        Method::Anticluster,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::WhompRandom => "whomp_random",
            Method::WhompMatching => "whomp_matching",
            Method::Random => "random",
            Method::CovariateAdaptive => "covariate_adaptive",
            Method::Anticluster => "anticluster",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupRequest {
    pub num_subgroups: usize,
    pub seed: u64,
    pub method: Method,
}

/// Tuning shared by all partitioners.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionerConfig {
    pub kmeans: KMeansOptions,
    pub barycenter: BarycenterOptions,
    pub pocock: PocockSimonConfig,
    pub anticluster_sweeps: usize,
    /// Reject `N` not divisible by the subgroup count instead of relaxing
    /// to sizes that differ by one.
    pub strict_divisibility: bool,
}

impl Default for PartitionerConfig {
    fn default() -> Self {
        Self {
            kmeans: KMeansOptions::default(),
            barycenter: BarycenterOptions::default(),
            pocock: PocockSimonConfig::default(),
            anticluster_sweeps: 100,
            strict_divisibility: false,
        }
    }
}

/// Runs the requested method; a pure function of `(data, request, config)`.
pub fn partition_subgroups(data: &Dataset, req: &SubgroupRequest, cfg: &PartitionerConfig) -> Result<Partition> {
    let mut rng = Rng::new(req.seed);
    let m = req.num_subgroups;
    match req.method {
        Method::WhompRandom => Ok(whomp_random(data, m, &cfg.kmeans, cfg.strict_divisibility, &mut rng)?.partition),
        Method::WhompMatching => {
            Ok(whomp_matching(data, m, &cfg.kmeans, &cfg.barycenter, cfg.strict_divisibility, &mut rng)?.partition)
        }
        Method::Random => random_balanced_assignment(data.len(), m, &mut rng),
        Method::CovariateAdaptive => pocock_simon(data, m, &cfg.pocock, &mut rng),
        Method::Anticluster => anticluster_exchange(data, m, &mut rng, cfg.anticluster_sweeps),
    }
}
