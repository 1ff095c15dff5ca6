//! Balanced k-means: Lloyd iterations whose assignment step is a
//! capacitated optimal transport problem.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::index::sample;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::rng::Rng;
use crate::stats::{select_rows, variance};
use crate::transport::{capacitated_assignment, match_uniform};

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansOptions {
    pub restarts: usize,
    /// Stop once the squared W2 shift between successive center sets is below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            tol: 1e-9,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalancedKMeansResult {
    /// Cluster `k` corresponds to row `k` of `centers`.
    pub partition: Partition,
    pub centers: Array2<f64>,
    /// `Σ_p var(X_p)`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every Lloyd step of the winning restart.
    pub history: Vec<f64>,
}

/// Cluster sizes `floor(n/k)`, with the remainder going to the first clusters.
pub fn balanced_capacities(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|i| n / k + usize::from(i < n % k)).collect()
}

/// `Σ_p var(X_p)` for the groups of `part`.
pub fn clustering_objective(points: ArrayView2<f64>, part: &Partition) -> f64 {
    part.groups()
        .iter()
        .map(|g| variance(select_rows(points, g).view()))
        .sum()
}

pub fn balanced_kmeans(data: &Dataset, k: usize, opts: &KMeansOptions, rng: &mut Rng) -> Result<BalancedKMeansResult> {
    let n = data.len();
    if k == 0 || k > n {
        return Err(Error::InvalidGroupCount { groups: k, n });
    }
    let distinct = distinct_rows(data.points().view());
    let base = rng.fork();
    let mut best: Option<BalancedKMeansResult> = None;
    for r in 0..opts.restarts.max(1) {
        let mut rr = base.derive(r as u64);
        let run = single_restart(data.points().view(), k, &distinct, opts, &mut rr)?;
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Index of the first occurrence of every distinct row.
fn distinct_rows(points: ArrayView2<f64>) -> Vec<usize> {
    let mut seen = std::collections::HashSet::new();
    (0..points.nrows())
        .filter(|&i| seen.insert(points.row(i).iter().map(|v| v.to_bits()).collect::<Vec<u64>>()))
        .collect()
}

/// Initial centers are `k` points with distinct coordinates when the data
/// has that many; repeated rows would otherwise start two centers together.
fn initial_centers(n: usize, k: usize, distinct: &[usize], rng: &mut Rng) -> Vec<usize> {
    if distinct.len() >= k {
        return sample(rng, distinct.len(), k).into_iter().map(|i| distinct[i]).collect();
    }
    let rest: Vec<usize> = (0..n).filter(|i| distinct.binary_search(i).is_err()).collect();
    let mut init = distinct.to_vec();
    init.extend(sample(rng, rest.len(), k - distinct.len()).into_iter().map(|i| rest[i]));
    init
}

fn single_restart(
    points: ArrayView2<f64>,
    k: usize,
    distinct: &[usize],
    opts: &KMeansOptions,
    rng: &mut Rng,
) -> Result<BalancedKMeansResult> {
    let n = points.nrows();
    let caps = balanced_capacities(n, k);
    let init = initial_centers(n, k, distinct, rng);
    let mut centers = select_rows(points, &init);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut assignment = Vec::new();
    while iterations < opts.max_iter.max(1) {
        iterations += 1;
        let (a, _) = capacitated_assignment(points, centers.view(), &caps)?;
        let new_centers = centroids(points, &a, k);
        let part = Partition::from_assignment(a.clone(), k)?;
        history.push(clustering_objective(points, &part));
        assignment = a;
        let shift = match_uniform(centers.view(), new_centers.view())?.cost / k as f64;
        centers = new_centers;
        if shift <= opts.tol {
            converged = true;
            break;
        }
    }
    let partition = Partition::from_assignment(assignment, k)?;
    let objective = clustering_objective(points, &partition);
    Ok(BalancedKMeansResult {
        partition,
        centers,
        objective,
        iterations,
        converged,
        history,
    })
}

fn centroids(points: ArrayView2<f64>, assignment: &[usize], k: usize) -> Array2<f64> {
    let mut sums = Array2::<f64>::zeros((k, points.ncols()));
    let mut counts = vec![0usize; k];
    for (row, &g) in points.axis_iter(Axis(0)).zip(assignment) {
        let mut s = sums.row_mut(g);
        s += &row;
        counts[g] += 1;
    }
    for (mut s, &c) in sums.axis_iter_mut(Axis(0)).zip(&counts) {
        s /= c.max(1) as f64;
    }
    sums
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exhaustive_balanced_kmeans;

    #[test]
    fn three_pairs_on_a_line() {
        let d = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![10.0], vec![11.0], vec![20.0], vec![21.0]]).unwrap();
        let r = balanced_kmeans(&d, 3, &KMeansOptions::default(), &mut Rng::new(3)).unwrap();
        assert!((r.objective - 0.75).abs() < 1e-12);
        let a = r.partition.assignment();
        assert_eq!(a[0], a[1]);
        assert_eq!(a[2], a[3]);
        assert_eq!(a[4], a[5]);
        let (best, _) = exhaustive_balanced_kmeans(d.points().view(), 3).unwrap();
        assert!((best - 0.75).abs() < 1e-12);
    }

    #[test]
    fn identical_points() {
        let d = Dataset::from_rows(&vec![vec![2.0, 2.0]; 6]).unwrap();
        let r = balanced_kmeans(&d, 2, &KMeansOptions::default(), &mut Rng::new(1)).unwrap();
        assert_eq!(r.objective, 0.0);
        r.partition.validate(6, true).unwrap();
    }

    #[test]
    fn uneven_sizes_stay_balanced() {
        let rows: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64, (i * i) as f64 * 0.1]).collect();
        let d = Dataset::from_rows(&rows).unwrap();
        let r = balanced_kmeans(&d, 3, &KMeansOptions::default(), &mut Rng::new(2)).unwrap();
        assert_eq!(r.partition.sizes(), &[3, 2, 2]);
        assert!(balanced_kmeans(&d, 8, &KMeansOptions::default(), &mut Rng::new(2)).is_err());
    }

    #[test]
    fn capacities_split_remainder_to_the_front() {
        assert_eq!(balanced_capacities(7, 3), vec![3, 2, 2]);
        assert_eq!(balanced_capacities(8, 4), vec![2, 2, 2, 2]);
    }
}
