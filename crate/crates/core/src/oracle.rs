//! Brute-force references used to certify the heuristics on small inputs.

use ndarray::ArrayView2;

use crate::combinatorics::{balanced_partition_count, for_each_balanced_partition};
use crate::error::{Error, Result};
use crate::stats::{select_rows, variance};
use crate::transport::w2_sq_uniform;

/// Largest number of partitions the oracles will enumerate.
pub const ORACLE_BUDGET: f64 = 3.0e6;

/// Relative tolerance used to decide that two objective values tie.
pub const TIE_TOL: f64 = 1e-9;

/// Minimum of `Σ_p var(X_p)` over all partitions into `k` groups of equal
/// size, plus every partition attaining it (within [`TIE_TOL`]).
pub fn exhaustive_balanced_kmeans(points: ArrayView2<f64>, k: usize) -> Result<(f64, Vec<Vec<Vec<usize>>>)> {
    let n = points.nrows();
    let c = group_size(n, k)?;
    minimize(n, c, |groups| {
        groups
            .iter()
            .map(|g| variance(select_rows(points, g).view()))
            .sum()
    })
}

/// Minimum of `Σ_q W2²(X_q, X)` over all partitions into `m` groups of
/// equal size, plus every partition attaining it.
pub fn exhaustive_whomp(points: ArrayView2<f64>, m: usize) -> Result<(f64, Vec<Vec<Vec<usize>>>)> {
    let n = points.nrows();
    let k = group_size(n, m)?;
    minimize(n, k, |groups| whomp_objective(points, groups))
}

/// `Σ_q W2²(X_q, X)` for explicit groups.
pub fn whomp_objective(points: ArrayView2<f64>, groups: &[Vec<usize>]) -> f64 {
    groups
        .iter()
        .map(|g| w2_sq_uniform(select_rows(points, g).view(), points).expect("valid groups"))
        .sum()
}

/// Sorted copy with each group sorted, for set comparisons.
pub fn canonical_groups(groups: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| {
            let mut g = g.clone();
            g.sort_unstable();
            g
        })
        .collect();
    out.sort();
    out
}

fn group_size(n: usize, groups: usize) -> Result<usize> {
    if groups == 0 || n % groups != 0 {
        return Err(Error::NotDivisible { n, groups });
    }
    let c = n / groups;
    let needed = balanced_partition_count(n, c);
    if needed > ORACLE_BUDGET {
        return Err(Error::BudgetExceeded {
            needed,
            budget: ORACLE_BUDGET,
        });
    }
    Ok(c)
}

fn minimize(n: usize, c: usize, mut f: impl FnMut(&[Vec<usize>]) -> f64) -> Result<(f64, Vec<Vec<Vec<usize>>>)> {
    let mut scored = Vec::new();
    let mut best = f64::INFINITY;
    for_each_balanced_partition(n, c, |groups| {
        let v = f(groups);
        best = best.min(v);
        scored.push((v, groups.to_vec()));
    });
    let cut = best + TIE_TOL * (1.0 + best.abs());
    let winners = scored.into_iter().filter(|(v, _)| *v <= cut).map(|(_, g)| g).collect();
    Ok((best, winners))
}
