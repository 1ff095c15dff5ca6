//! Pocock–Simon minimization (covariate-adaptive randomization).

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PocockSimonConfig {
    /// Quantile bins per covariate.
    pub bins: usize,
    /// Probability of taking the imbalance-minimizing group.
    pub p: f64,
    /// Per-covariate weights; `None` means all ones.
    pub weights: Option<Vec<f64>>,
}

impl Default for PocockSimonConfig {
    fn default() -> Self {
        Self {
            bins: 2,
            p: 0.75,
            weights: None,
        }
    }
}

/// Bin of every value by rank: `floor(bins · rank / n)`, where tied values
/// share the rank of their first occurrence.
pub fn quantile_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0; n];
    let mut rank = 0;
    for (pos, &i) in order.iter().enumerate() {
        if pos == 0 || values[i] != values[order[pos - 1]] {
            rank = pos;
        }
        out[i] = (bins * rank / n).min(bins - 1);
    }
    out
}

/// Sequential minimization: units arrive in a seeded random order; each
/// goes to the eligible group with the smallest weighted sum over
/// covariates of the range of per-group counts of the unit's bin, with
/// probability `p`, and otherwise to a uniformly chosen other eligible
/// group. Groups are capped at `floor(N/m)` units, and only `N mod m` of
/// them may grow one larger, so final sizes differ by at most one.
pub fn pocock_simon(data: &Dataset, m: usize, config: &PocockSimonConfig, rng: &mut Rng) -> Result<Partition> {
    let n = data.len();
    if m == 0 || m > n {
        return Err(Error::InvalidGroupCount { groups: m, n });
    }
    if !(config.p > 0.5 && config.p <= 1.0) {
        return Err(Error::InvalidProbability(config.p));
    }
    if config.bins == 0 {
        return Err(Error::Invalid("bin count must be positive".into()));
    }
    let x: ArrayView2<f64> = data.points().view();
    let d = x.ncols();
    let weights = match &config.weights {
        Some(w) if w.len() != d => {
            return Err(Error::LengthMismatch {
                what: "covariate weights",
                expected: d,
                actual: w.len(),
            })
        }
        Some(w) if w.iter().any(|&v| !(v >= 0.0)) => return Err(Error::Invalid("covariate weights must be nonnegative".into())),
        Some(w) => w.clone(),
        None => vec![1.0; d],
    };
    let bins: Vec<Vec<usize>> = (0..d)
        .map(|t| quantile_bins(&x.column(t).to_vec(), config.bins))
        .collect();

    let (base, extra) = (n / m, n % m);
    // counts[t][b][g]: units in group g whose covariate t falls in bin b.
    let mut counts = vec![vec![vec![0usize; m]; config.bins]; d];
    let mut sizes = vec![0usize; m];
    let mut assignment = vec![0usize; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    for &u in &order {
        let grown = sizes.iter().filter(|&&s| s > base).count();
        let eligible: Vec<usize> = (0..m).filter(|&g| sizes[g] < base || (sizes[g] == base && grown < extra)).collect();
        let scores: Vec<f64> = eligible
            .iter()
            .map(|&g| {
                (0..d)
                    .map(|t| {
                        let row = &counts[t][bins[t][u]];
                        let (mut lo, mut hi) = (usize::MAX, 0);
                        for (h, &c) in row.iter().enumerate() {
                            let c = c + usize::from(h == g);
                            lo = lo.min(c);
                            hi = hi.max(c);
                        }
                        weights[t] * (hi - lo) as f64
                    })
                    .sum()
            })
            .collect();
        let best = scores.iter().cloned().fold(f64::INFINITY, f64::min);
        let (minimizers, others): (Vec<(usize, f64)>, Vec<(usize, f64)>) = eligible
            .iter()
            .copied()
            .zip(scores.iter().copied())
            .partition(|&(_, s)| s <= best + 1e-12);
        let take_best = others.is_empty() || rng.random::<f64>() < config.p;
        let pool = if take_best { &minimizers } else { &others };
        let g = pool[rng.random_range(0..pool.len())].0;
        assignment[u] = g;
        sizes[g] += 1;
        for t in 0..d {
            counts[t][bins[t][u]][g] += 1;
        }
    }
    Partition::from_assignment(assignment, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_by_rank() {
        assert_eq!(quantile_bins(&[0.0, 0.0, 1.0, 1.0], 2), vec![0, 0, 1, 1]);
        assert_eq!(quantile_bins(&[3.0, 1.0, 2.0, 4.0], 4), vec![2, 0, 1, 3]);
        assert_eq!(quantile_bins(&[5.0; 6], 3), vec![0; 6]);
    }

    #[test]
    fn binary_covariate_splits_evenly() {
        let d = Dataset::from_rows(&[vec![0.0], vec![0.0], vec![1.0], vec![1.0]]).unwrap();
        let cfg = PocockSimonConfig { p: 1.0, ..Default::default() };
        for seed in 0..50 {
            let p = pocock_simon(&d, 2, &cfg, &mut Rng::new(seed)).unwrap();
            let a = p.assignment();
            assert_ne!(a[0], a[1], "seed {seed}");
            assert_ne!(a[2], a[3], "seed {seed}");
        }
    }

    #[test]
    fn identical_covariates_stay_balanced() {
        let d = Dataset::from_rows(&vec![vec![1.0, 2.0]; 9]).unwrap();
        let cfg = PocockSimonConfig { p: 1.0, ..Default::default() };
        let p = pocock_simon(&d, 4, &cfg, &mut Rng::new(3)).unwrap();
        p.validate(9, true).unwrap();
    }

    #[test]
    fn deterministic_and_validated() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![(i * 7 % 11) as f64, (i % 3) as f64]).collect();
        let d = Dataset::from_rows(&rows).unwrap();
        let cfg = PocockSimonConfig::default();
        let a = pocock_simon(&d, 3, &cfg, &mut Rng::new(5)).unwrap();
        let b = pocock_simon(&d, 3, &cfg, &mut Rng::new(5)).unwrap();
        assert_eq!(a, b);
        a.validate(20, true).unwrap();
        let bad = PocockSimonConfig { p: 0.5, ..Default::default() };
        assert!(pocock_simon(&d, 3, &bad, &mut Rng::new(5)).is_err());
    }
}
