//! Randomization inference for a two-arm average treatment effect.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{random_balanced_assignment, Partition};
use crate::partitioners::deal_from_clusters;
use crate::rng::Rng;
use crate::stats::{pairwise_sum, scalar_mean, scalar_variance, select_rows};
use crate::transport::w2_sq_uniform;

/// Source of random two-group splits.
pub trait PartitionSampler {
    fn sample(&self, rng: &mut Rng) -> Result<Partition>;
}

/// Uniform draw from `Q(P)` for fixed clusters (WHOMP Random with `P` held fixed).
#[derive(Debug, Clone)]
pub struct QpSampler {
    pub clusters: Vec<Vec<usize>>,
    pub groups: usize,
    pub n: usize,
}

impl PartitionSampler for QpSampler {
    fn sample(&self, rng: &mut Rng) -> Result<Partition> {
        deal_from_clusters(&self.clusters, self.groups, self.n, rng)
    }
}

/// Completely random balanced split.
#[derive(Debug, Clone)]
pub struct UniformSampler {
    pub groups: usize,
    pub n: usize,
}

impl PartitionSampler for UniformSampler {
    fn sample(&self, rng: &mut Rng) -> Result<Partition> {
        random_balanced_assignment(self.n, self.groups, rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AteTestResult {
    pub tau_hat: f64,
    pub null_distribution: Vec<f64>,
    /// `(#{|null| ≥ |tau_hat|} + 1) / (draws + 1)`.
    pub p_value: f64,
    pub draws: usize,
}

/// `mean_{i ∈ group 0} y0_i − mean_{i ∈ group 1} y1_i`.
pub fn difference_in_means(y0: &[f64], y1: &[f64], part: &Partition) -> Result<f64> {
    if part.num_groups() < 2 {
        return Err(Error::InvalidGroupCount {
            groups: part.num_groups(),
            n: part.len(),
        });
    }
    if y0.len() != part.len() || y1.len() != part.len() {
        return Err(Error::LengthMismatch {
            what: "outcomes",
            expected: part.len(),
            actual: y0.len().min(y1.len()),
        });
    }
    let groups = part.groups();
    let m0 = scalar_mean(&groups[0].iter().map(|&i| y0[i]).collect::<Vec<_>>());
    let m1 = scalar_mean(&groups[1].iter().map(|&i| y1[i]).collect::<Vec<_>>());
    Ok(m0 - m1)
}

/// Observed effect under `observed`, and its null distribution obtained by
/// redrawing the split `draws` times while keeping the observed outcomes.
/// Draw `k` uses a generator derived from `(rng, k)`.
pub fn ate_randomization_test(
    outcomes: &[f64],
    observed: &Partition,
    sampler: &dyn PartitionSampler,
    draws: usize,
    rng: &mut Rng,
) -> Result<AteTestResult> {
    if observed.num_groups() != 2 {
        return Err(Error::InvalidGroupCount {
            groups: observed.num_groups(),
            n: observed.len(),
        });
    }
    if outcomes.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("outcomes must be finite".into()));
    }
    let tau_hat = difference_in_means(outcomes, outcomes, observed)?;
    let base = rng.fork();
    let mut null_distribution = Vec::with_capacity(draws);
    for k in 0..draws {
        let part = sampler.sample(&mut base.derive(k as u64))?;
        if part.num_groups() != 2 {
            return Err(Error::InvalidGroupCount {
                groups: part.num_groups(),
                n: part.len(),
            });
        }
        null_distribution.push(difference_in_means(outcomes, outcomes, &part)?);
    }
    // A relative slack keeps values equal up to rounding on the ">=" side.
    let cut = tau_hat.abs() - 1e-12 * (1.0 + tau_hat.abs());
    let extreme = null_distribution.iter().filter(|v| v.abs() >= cut).count();
    Ok(AteTestResult {
        tau_hat,
        p_value: (extreme + 1) as f64 / (draws + 1) as f64,
        null_distribution,
        draws,
    })
}

/// Monte-Carlo check of the bound
/// `E(τ̂ − τ)² ≤ L² · m/(m−1) · Σ_q W2²(X_q, X)` for splits drawn from `Q(P)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceBoundCheck {
    pub tau: f64,
    pub mean_tau_hat: f64,
    /// Standard error of `mean_tau_hat`.
    pub standard_error: f64,
    /// Empirical `E(τ̂ − τ)²`.
    pub empirical: f64,
    /// Smallest right-hand side over the sampled members of `Q(P)`.
    pub bound: f64,
    pub draws: usize,
}

impl VarianceBoundCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.empirical <= self.bound * (1.0 + slack) + 1e-12
    }
}

/// `y0`, `y1` are the potential outcomes of every unit and `lipschitz` the
/// common Lipschitz constant of the outcome map in `x`. The bound holds
/// for every member of `Q(P)`; it is evaluated on `bound_samples` draws
/// and the smallest value kept.
#[allow(clippy::too_many_arguments)]
pub fn ate_variance_bound_check(
    points: ndarray::ArrayView2<f64>,
    y0: &[f64],
    y1: &[f64],
    lipschitz: f64,
    clusters: &[Vec<usize>],
    draws: usize,
    bound_samples: usize,
    rng: &mut Rng,
) -> Result<VarianceBoundCheck> {
    let n = points.nrows();
    let m = 2;
    let sampler = QpSampler {
        clusters: clusters.to_vec(),
        groups: m,
        n,
    };
    let tau = scalar_mean(y0) - scalar_mean(y1);
    let base = rng.fork();
    let mut estimates = Vec::with_capacity(draws);
    for k in 0..draws {
        let part = sampler.sample(&mut base.derive(k as u64))?;
        estimates.push(difference_in_means(y0, y1, &part)?);
    }
    let sq: Vec<f64> = estimates.iter().map(|t| (t - tau) * (t - tau)).collect();
    let empirical = pairwise_sum(&sq) / draws.max(1) as f64;
    let mean_tau_hat = scalar_mean(&estimates);
    let standard_error = (scalar_variance(&estimates) / draws.max(1) as f64).sqrt();

    let bound_base = rng.fork();
    let mut bound = f64::INFINITY;
    for k in 0..bound_samples.max(1) {
        let part = sampler.sample(&mut bound_base.derive(k as u64))?;
        let s: f64 = part
            .groups()
            .iter()
            .map(|g| w2_sq_uniform(select_rows(points, g).view(), points))
            .sum::<Result<f64>>()?;
        bound = bound.min(lipschitz * lipschitz * m as f64 / (m - 1) as f64 * s);
    }
    Ok(VarianceBoundCheck {
        tau,
        mean_tau_hat,
        standard_error,
        empirical,
        bound,
        draws,
    })
}
