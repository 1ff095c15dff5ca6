//! Free-support Wasserstein-2 barycenters of equal-size uniform clouds.
//!
//! With uniform weights and equal sizes every optimal coupling is a
//! permutation, so a barycenter is described by `c` support points and, for
//! each cloud `p`, a bijection `σ_p` with support point `j` sitting at the
//! mean of the matched points `x_{p, σ_p(j)}`.

use ndarray::{Array2, ArrayView2};
use rand::seq::index::sample;

use crate::combinatorics::{factorial, Permutations};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::stats::{pairwise_sum, sq_dist};
use crate::transport::hungarian;

#[derive(Debug, Clone, PartialEq)]
pub struct BarycenterResult {
    /// `c × d` support points.
    pub support: Array2<f64>,
    /// `matchings[p][j]` is the row of cloud `p` matched to support point `j`.
    pub matchings: Vec<Vec<usize>>,
    /// `Σ_p W2²(barycenter, X_p)`.
    pub cost: f64,
    /// Cost after each support update of the winning start.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BarycenterInit {
    /// One start per cloud plus one random subset of all points; best kept.
    Multistart,
    /// Start from the given cloud.
    Cluster(usize),
    /// Start from an explicit support.
    Support(Array2<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarycenterOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub init: BarycenterInit,
    /// Seed of the random-subset start.
    pub seed: u64,
    /// [`barycenter`] enumerates exactly when `(c!)^(K−1)` is at most this.
    pub exact_budget: f64,
}

impl Default for BarycenterOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            init: BarycenterInit::Multistart,
            seed: 0,
            exact_budget: 1e4,
        }
    }
}

/// Exact barycenter when the enumeration fits `opts.exact_budget`,
/// otherwise the fixed-point iteration.
pub fn barycenter(clouds: &[Array2<f64>], opts: &BarycenterOptions) -> Result<BarycenterResult> {
    let (c, _) = check_clouds(clouds)?;
    if c <= 7 && factorial(c).powi(clouds.len() as i32 - 1) <= opts.exact_budget {
        barycenter_exact_small(clouds, opts.exact_budget)
    } else {
        barycenter_fixed_point(clouds, opts)
    }
}

/// Alternates optimal matchings and support averaging until the cost stops
/// decreasing by more than `tol`. The result is a fixed point, which is a
/// local but not necessarily global optimum.
pub fn barycenter_fixed_point(clouds: &[Array2<f64>], opts: &BarycenterOptions) -> Result<BarycenterResult> {
    let (c, _) = check_clouds(clouds)?;
    let starts: Vec<Array2<f64>> = match &opts.init {
        BarycenterInit::Cluster(p) => {
            let p = *p;
            if p >= clouds.len() {
                return Err(Error::GroupOutOfRange {
                    index: p,
                    groups: clouds.len(),
                });
            }
            vec![clouds[p].clone()]
        }
        BarycenterInit::Support(s) => {
            if s.dim() != clouds[0].dim() {
                return Err(Error::DimensionMismatch(s.nrows(), c));
            }
            vec![s.clone()]
        }
        BarycenterInit::Multistart => {
            let mut v: Vec<Array2<f64>> = clouds.to_vec();
            v.push(random_subset_start(clouds, c, opts.seed));
            v
        }
    };

    let mut best: Option<BarycenterResult> = None;
    for start in starts {
        let run = run_fixed_point(clouds, start, opts.tol, opts.max_iter);
        // Strict comparison keeps the earliest start on ties.
        if best.as_ref().is_none_or(|b| run.cost < b.cost) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Global optimum by enumerating every tuple `(σ_2, …, σ_K)` with `σ_1`
/// fixed to the identity. Fails when `(c!)^(K−1)` exceeds `budget`.
pub fn barycenter_exact_small(clouds: &[Array2<f64>], budget: f64) -> Result<BarycenterResult> {
    let (c, _) = check_clouds(clouds)?;
    let k = clouds.len();
    let needed = factorial(c).powi(k as i32 - 1);
    if c > 7 || needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let perms: Vec<Vec<usize>> = Permutations::new(c).collect();
    let identity: Vec<usize> = (0..c).collect();
    let mut idx = vec![0usize; k.saturating_sub(1)];
    let mut best_cost = f64::INFINITY;
    let mut best_idx = idx.clone();
    let mut sigmas: Vec<&[usize]> = vec![&identity; k];
    loop {
        for (p, &t) in idx.iter().enumerate() {
            sigmas[p + 1] = &perms[t];
        }
        let support = support_from(clouds, &sigmas);
        let cost = tuple_cost(clouds, &support, &sigmas);
        if cost < best_cost {
            best_cost = cost;
            best_idx.clone_from(&idx);
        }
        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                let mut matchings = vec![identity.clone()];
                matchings.extend(best_idx.iter().map(|&t| perms[t].clone()));
                let refs: Vec<&[usize]> = matchings.iter().map(Vec::as_slice).collect();
                let support = support_from(clouds, &refs);
                return Ok(BarycenterResult {
                    support,
                    matchings,
                    cost: best_cost,
                    history: vec![best_cost],
                    iterations: 0,
                    converged: true,
                });
            }
            idx[pos] += 1;
            if idx[pos] < perms.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// `Σ_p (1/c) Σ_j ‖support_j − x_{p, σ_p(j)}‖²`.
pub fn barycenter_cost(clouds: &[Array2<f64>], support: ArrayView2<f64>, matchings: &[Vec<usize>]) -> f64 {
    let refs: Vec<&[usize]> = matchings.iter().map(Vec::as_slice).collect();
    tuple_cost(clouds, &support.to_owned(), &refs)
}

fn check_clouds(clouds: &[Array2<f64>]) -> Result<(usize, usize)> {
    let first = clouds.first().ok_or(Error::EmptyDataset)?;
    let (c, d) = first.dim();
    if c == 0 {
        return Err(Error::EmptyDataset);
    }
    for (index, x) in clouds.iter().enumerate() {
        if x.ncols() != d {
            return Err(Error::DimensionMismatch(d, x.ncols()));
        }
        if x.nrows() != c {
            return Err(Error::UnequalClusters {
                index,
                expected: c,
                actual: x.nrows(),
            });
        }
    }
    Ok((c, d))
}

fn random_subset_start(clouds: &[Array2<f64>], c: usize, seed: u64) -> Array2<f64> {
    let total = c * clouds.len();
    let mut rng = Rng::new(seed);
    let picks = sample(&mut rng, total, c);
    let d = clouds[0].ncols();
    let mut out = Array2::zeros((c, d));
    for (r, i) in picks.iter().enumerate() {
        out.row_mut(r).assign(&clouds[i / c].row(i % c));
    }
    out
}

fn match_to(support: &Array2<f64>, cloud: &Array2<f64>) -> Vec<usize> {
    let c = support.nrows();
    let cost = Array2::from_shape_fn((c, c), |(j, i)| sq_dist(support.row(j), cloud.row(i)));
    hungarian::solve(cost.view())
}

fn support_from(clouds: &[Array2<f64>], sigmas: &[&[usize]]) -> Array2<f64> {
    let (c, d) = clouds[0].dim();
    let k = clouds.len() as f64;
    let mut s = Array2::zeros((c, d));
    for (cloud, sigma) in clouds.iter().zip(sigmas) {
        for j in 0..c {
            let mut row = s.row_mut(j);
            row += &cloud.row(sigma[j]);
        }
    }
    s / k
}

fn tuple_cost(clouds: &[Array2<f64>], support: &Array2<f64>, sigmas: &[&[usize]]) -> f64 {
    let c = support.nrows();
    let terms: Vec<f64> = clouds
        .iter()
        .zip(sigmas)
        .flat_map(|(cloud, sigma)| (0..c).map(move |j| sq_dist(support.row(j), cloud.row(sigma[j]))))
        .collect();
    pairwise_sum(&terms) / c as f64
}

fn run_fixed_point(clouds: &[Array2<f64>], start: Array2<f64>, tol: f64, max_iter: usize) -> BarycenterResult {
    let mut sigmas: Vec<Vec<usize>> = clouds.iter().map(|x| match_to(&start, x)).collect();
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let refs: Vec<&[usize]> = sigmas.iter().map(Vec::as_slice).collect();
        let support = support_from(clouds, &refs);
        let cost = tuple_cost(clouds, &support, &refs);
        history.push(cost);
        iterations += 1;
        let next: Vec<Vec<usize>> = clouds.iter().map(|x| match_to(&support, x)).collect();
        let next_refs: Vec<&[usize]> = next.iter().map(Vec::as_slice).collect();
        let next_cost = tuple_cost(clouds, &support, &next_refs);
        let converged = cost - next_cost <= tol;
        if converged || iterations >= max_iter {
            return BarycenterResult {
                support,
                matchings: sigmas,
                cost,
                history,
                iterations,
                converged,
            };
        }
        sigmas = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::match_uniform;
    use ndarray::array;

    #[test]
    fn identical_clouds_give_zero_cost() {
        let x = array![[0.0, 0.0], [1.0, 0.5], [3.0, -1.0]];
        let r = barycenter_fixed_point(&[x.clone(), x.clone(), x.clone()], &BarycenterOptions::default()).unwrap();
        assert!(r.cost.abs() < 1e-15);
        assert!(r.matchings.iter().all(|s| s == &r.matchings[0]));
        let e = barycenter_exact_small(&[x.clone(), x.clone()], 1e6).unwrap();
        assert!(e.cost.abs() < 1e-15);
    }

    #[test]
    fn two_clouds_give_midpoints() {
        let a = array![[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]];
        let b = array![[4.2, 0.1], [0.1, 4.3], [0.2, -0.1]];
        let r = barycenter_fixed_point(&[a.clone(), b.clone()], &BarycenterOptions::default()).unwrap();
        let m = match_uniform(a.view(), b.view()).unwrap();
        // Two-marginal cost is half the optimal matching cost averaged over points.
        assert!((r.cost - m.cost / 3.0 / 2.0).abs() < 1e-12);
        for j in 0..3 {
            let i0 = r.matchings[0][j];
            let i1 = r.matchings[1][j];
            assert_eq!(m.perm[i0], i1);
            for t in 0..2 {
                assert!((r.support[[j, t]] - 0.5 * (a[[i0, t]] + b[[i1, t]])).abs() < 1e-12);
            }
        }
        let e = barycenter_exact_small(&[a, b], 1e6).unwrap();
        assert!((e.cost - r.cost).abs() < 1e-12);
    }

    #[test]
    fn exact_small_hand_enumeration() {
        // K = 3, c = 2: four tuples (σ2, σ3) ∈ {id, swap}².
        let a = array![[0.0], [1.0]];
        let b = array![[0.0], [3.0]];
        let c = array![[2.0], [0.5]];
        let clouds = [a, b, c];
        let id = vec![0, 1];
        let sw = vec![1, 0];
        let mut costs = Vec::new();
        for s2 in [&id, &sw] {
            for s3 in [&id, &sw] {
                let m = vec![id.clone(), s2.clone(), s3.clone()];
                let refs: Vec<&[usize]> = m.iter().map(Vec::as_slice).collect();
                let s = support_from(&clouds, &refs);
                costs.push(barycenter_cost(&clouds, s.view(), &m));
            }
        }
        let best = costs.iter().cloned().fold(f64::INFINITY, f64::min);
        let e = barycenter_exact_small(&clouds, 1e6).unwrap();
        assert!((e.cost - best).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let a = array![[0.0], [1.0]];
        let b = array![[0.0]];
        assert!(matches!(
            barycenter_fixed_point(&[a.clone(), b], &BarycenterOptions::default()),
            Err(Error::UnequalClusters { .. })
        ));
        let big = Array2::zeros((7, 1));
        assert!(matches!(
            barycenter_exact_small(&[big.clone(), big.clone(), big], 1e6),
            Err(Error::BudgetExceeded { .. })
        ));
        let _ = a;
    }

    #[test]
    fn history_is_monotone_and_certificate_holds() {
        let mut rng = Rng::new(5);
        use rand::Rng as _;
        let clouds: Vec<Array2<f64>> = (0..4)
            .map(|_| Array2::from_shape_fn((5, 2), |_| rng.random::<f64>() * 10.0))
            .collect();
        let r = barycenter_fixed_point(&clouds, &BarycenterOptions::default()).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        let rematched: Vec<Vec<usize>> = clouds.iter().map(|x| match_to(&r.support, x)).collect();
        let again = barycenter_cost(&clouds, r.support.view(), &rematched);
        assert!(r.cost - again <= 1e-10);
    }
}
