//! Exact discrete optimal transport under squared Euclidean cost.

pub mod hungarian;
mod one_d;
pub mod simplex;

pub use one_d::{w2_1d, w2_1d_sq, w2_1d_uniform_sq};

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::stats::{pairwise_sum, sq_dist};

/// Largest expanded problem size for which uniform measures are solved as
/// an assignment problem instead of through the transportation simplex.
const EXPANSION_LIMIT: usize = 720;

/// Weighted point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    support: Array2<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(support: Array2<f64>, weights: Vec<f64>) -> Result<Self> {
        if support.nrows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if weights.len() != support.nrows() {
            return Err(Error::LengthMismatch {
                what: "weights",
                expected: support.nrows(),
                actual: weights.len(),
            });
        }
        if let Some(((row, column), _)) = support.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, column });
        }
        let sum = pairwise_sum(&weights);
        if weights.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::WeightNormalization { sum });
        }
        Ok(Self { support, weights })
    }

    pub fn uniform(support: Array2<f64>) -> Result<Self> {
        let n = support.nrows();
        Self::new(support, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn support(&self) -> &Array2<f64> {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.support.ncols()
    }

    fn is_uniform(&self) -> bool {
        let w0 = 1.0 / self.len() as f64;
        self.weights.iter().all(|&w| (w - w0).abs() <= 1e-15)
    }
}

/// Coupling between two measures, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub entries: Vec<(usize, usize, f64)>,
    pub cost: f64,
}

impl TransportPlan {
    pub fn row_marginals(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for &(i, _, f) in &self.entries {
            out[i] += f;
        }
        out
    }

    pub fn col_marginals(&self, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for &(_, j, f) in &self.entries {
            out[j] += f;
        }
        out
    }
}

/// Optimal bijection between equal-size point lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// `perm[i]` is the index in `b` matched to `a[i]`.
    pub perm: Vec<usize>,
    /// Summed (not averaged) squared distance.
    pub cost: f64,
}

pub fn cost_matrix(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.nrows(), b.nrows()), |(i, j)| sq_dist(a.row(i), b.row(j)))
}

/// Exact W2 distance and an optimal plan. Uniform measures whose expanded
/// size `lcm(n, m)` is small are solved as an assignment problem; everything
/// else goes through the transportation simplex.
pub fn w2_exact(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<(f64, TransportPlan)> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let (n, m) = (a.len(), b.len());
    let l = lcm(n, m);
    let plan = if a.is_uniform() && b.is_uniform() && l <= EXPANSION_LIMIT {
        uniform_plan(a.support().view(), b.support().view())
    } else {
        transport_lp(a, b)?
    };
    Ok((plan.cost.max(0.0).sqrt(), plan))
}

/// Squared W2 between uniform measures on two point clouds.
pub fn w2_sq_uniform(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<f64> {
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(a.ncols(), b.ncols()));
    }
    if a.nrows() == 0 || b.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if a.ncols() == 1 {
        let xa: Vec<f64> = a.iter().copied().collect();
        let xb: Vec<f64> = b.iter().copied().collect();
        return w2_1d_uniform_sq(&xa, &xb);
    }
    if lcm(a.nrows(), b.nrows()) <= EXPANSION_LIMIT {
        Ok(uniform_plan(a, b).cost)
    } else {
        let (_, plan) = w2_exact(&DiscreteMeasure::uniform(a.to_owned())?, &DiscreteMeasure::uniform(b.to_owned())?)?;
        Ok(plan.cost)
    }
}

/// Solves the transportation linear program directly, whatever the weights.
pub fn transport_lp(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<TransportPlan> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let c = cost_matrix(a.support().view(), b.support().view());
    let entries = simplex::solve(a.weights(), b.weights(), c.view())?;
    let terms: Vec<f64> = entries.iter().map(|&(i, j, f)| f * c[[i, j]]).collect();
    Ok(TransportPlan {
        cost: pairwise_sum(&terms),
        entries,
    })
}

/// Minimum-cost bijection between two equal-size point lists.
pub fn match_uniform(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<Matching> {
    if a.nrows() != b.nrows() {
        return Err(Error::LengthMismatch {
            what: "matching",
            expected: a.nrows(),
            actual: b.nrows(),
        });
    }
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(a.ncols(), b.ncols()));
    }
    let c = cost_matrix(a, b);
    let perm = hungarian::solve(c.view());
    let terms: Vec<f64> = perm.iter().enumerate().map(|(i, &j)| c[[i, j]]).collect();
    Ok(Matching {
        cost: pairwise_sum(&terms),
        perm,
    })
}

/// Assigns every point to a center so that center `k` receives exactly
/// `capacities[k]` points, minimizing total squared distance. Returns the
/// center of each point and the summed cost.
pub fn capacitated_assignment(
    points: ArrayView2<f64>,
    centers: ArrayView2<f64>,
    capacities: &[usize],
) -> Result<(Vec<usize>, f64)> {
    if capacities.len() != centers.nrows() {
        return Err(Error::LengthMismatch {
            what: "capacities",
            expected: centers.nrows(),
            actual: capacities.len(),
        });
    }
    if points.ncols() != centers.ncols() {
        return Err(Error::DimensionMismatch(points.ncols(), centers.ncols()));
    }
    let total: usize = capacities.iter().sum();
    if total != points.nrows() {
        return Err(Error::CapacityMismatch {
            sum: total,
            expected: points.nrows(),
        });
    }
    let owner: Vec<usize> = capacities
        .iter()
        .enumerate()
        .flat_map(|(k, &c)| std::iter::repeat_n(k, c))
        .collect();
    let c = Array2::from_shape_fn((points.nrows(), owner.len()), |(i, s)| {
        sq_dist(points.row(i), centers.row(owner[s]))
    });
    let slots = hungarian::solve(c.view());
    let assignment: Vec<usize> = slots.iter().map(|&s| owner[s]).collect();
    let terms: Vec<f64> = slots.iter().enumerate().map(|(i, &s)| c[[i, s]]).collect();
    Ok((assignment, pairwise_sum(&terms)))
}

/// Uniform-to-uniform plan by expanding both measures to `lcm(n, m)` unit
/// atoms and solving the assignment problem.
fn uniform_plan(a: ArrayView2<f64>, b: ArrayView2<f64>) -> TransportPlan {
    let (n, m) = (a.nrows(), b.nrows());
    let l = lcm(n, m);
    let (ra, rb) = (l / n, l / m);
    let c = cost_matrix(a, b);
    let big = Array2::from_shape_fn((l, l), |(s, t)| c[[s / ra, t / rb]]);
    let sol = hungarian::solve(big.view());
    let mut mass = std::collections::BTreeMap::new();
    for (s, &t) in sol.iter().enumerate() {
        *mass.entry((s / ra, t / rb)).or_insert(0usize) += 1;
    }
    let unit = 1.0 / l as f64;
    let entries: Vec<(usize, usize, f64)> = mass
        .into_iter()
        .map(|((i, j), k)| (i, j, k as f64 * unit))
        .collect();
    let terms: Vec<f64> = sol.iter().enumerate().map(|(s, &t)| big[[s, t]]).collect();
    TransportPlan {
        cost: pairwise_sum(&terms) * unit,
        entries,
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}
