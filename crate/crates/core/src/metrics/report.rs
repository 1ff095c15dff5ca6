//! Homogeneity diagnostics of a subgroup partition.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::Result;
use crate::partition::Partition;
use crate::stats::{mean_point, scalar_variance, select_rows, sq_dist, variance};
use crate::transport::w2_sq_uniform;

/// Distances and moment summaries of subgroups against the whole sample.
///
/// Group averages are weighted by `|q|/N`, which is `1/m` whenever the
/// subgroups have equal size and keeps `total_var = var_of_means +
/// mean_of_vars` exact when they do not. `var_of_vars` is the unweighted
/// population variance of the scalar subgroup variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub sizes: Vec<usize>,
    /// `W2(X_q, X)` per subgroup.
    pub per_subgroup_w2: Vec<f64>,
    /// `var(X_q)` per subgroup.
    pub per_subgroup_var: Vec<f64>,
    pub mean_w2: f64,
    /// `Σ_q W2²(X_q, X)`.
    pub sum_w2_sq: f64,
    pub var_of_means: f64,
    pub mean_of_vars: f64,
    pub var_of_vars: f64,
    pub total_var: f64,
}

pub fn homogeneity_report(data: &Dataset, part: &Partition) -> Result<HomogeneityReport> {
    part.validate(data.len(), false)?;
    let x = data.points().view();
    let n = data.len() as f64;
    let mu = mean_point(x);
    let groups = part.groups();
    let mut per_subgroup_w2 = Vec::with_capacity(groups.len());
    let mut per_subgroup_var = Vec::with_capacity(groups.len());
    let mut sum_w2_sq = 0.0;
    let mut var_of_means = 0.0;
    let mut mean_of_vars = 0.0;
    for g in &groups {
        let xq = select_rows(x, g);
        let w2sq = w2_sq_uniform(xq.view(), x)?;
        let v = variance(xq.view());
        let share = g.len() as f64 / n;
        per_subgroup_w2.push(w2sq.max(0.0).sqrt());
        per_subgroup_var.push(v);
        sum_w2_sq += w2sq;
        var_of_means += share * sq_dist(mean_point(xq.view()).view(), mu.view());
        mean_of_vars += share * v;
    }
    let mean_w2 = per_subgroup_w2.iter().sum::<f64>() / groups.len() as f64;
    Ok(HomogeneityReport {
        sizes: part.sizes().to_vec(),
        var_of_vars: scalar_variance(&per_subgroup_var),
        mean_w2,
        sum_w2_sq,
        var_of_means,
        mean_of_vars,
        total_var: variance(x),
        per_subgroup_w2,
        per_subgroup_var,
    })
}

impl HomogeneityReport {
    /// `total_var − var_of_means − mean_of_vars`; zero up to rounding.
    pub fn total_variance_residual(&self) -> f64 {
        self.total_var - self.var_of_means - self.mean_of_vars
    }

    pub const CSV_HEADER: [&'static str; 5] = ["subgroup", "size", "w2", "variance", "w2_sq"];

    /// One row per subgroup followed by a `summary` row
    /// (`summary, N, mean_w2, mean_of_vars, sum_w2_sq`).
    pub fn csv_rows(&self) -> Vec<[String; 5]> {
        let mut rows: Vec<[String; 5]> = self
            .per_subgroup_w2
            .iter()
            .enumerate()
            .map(|(q, w)| {
                [
                    q.to_string(),
                    self.sizes[q].to_string(),
                    w.to_string(),
                    self.per_subgroup_var[q].to_string(),
                    (w * w).to_string(),
                ]
            })
            .collect();
        rows.push([
            "summary".into(),
            self.sizes.iter().sum::<usize>().to_string(),
            self.mean_w2.to_string(),
            self.mean_of_vars.to_string(),
            self.sum_w2_sq.to_string(),
        ]);
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(v: &[f64]) -> Dataset {
        Dataset::from_rows(&v.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn four_points_on_a_line() {
        let d = line(&[0.0, 1.0, 2.0, 3.0]);
        let p = Partition::from_groups(&[vec![0, 3], vec![1, 2]], 4).unwrap();
        let r = homogeneity_report(&d, &p).unwrap();
        assert!(r.var_of_means.abs() < 1e-15);
        assert!((r.total_var - 1.25).abs() < 1e-15);
        // var({0,3}) = 2.25 and var({1,2}) = 0.25.
        assert!((r.mean_of_vars - 1.25).abs() < 1e-15);
        assert!((r.per_subgroup_w2[0].powi(2) - 0.5).abs() < 1e-14);
        assert!((r.per_subgroup_w2[1].powi(2) - 0.5).abs() < 1e-14);
        assert!((r.var_of_vars - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_copies_have_zero_distance() {
        let d = line(&[0.0, 5.0, 0.0, 5.0, 0.0, 5.0]);
        let p = Partition::from_groups(&[vec![0, 1], vec![2, 3], vec![4, 5]], 6).unwrap();
        let r = homogeneity_report(&d, &p).unwrap();
        assert!(r.per_subgroup_w2.iter().all(|&w| w < 1e-12));
    }

    #[test]
    fn single_group() {
        let d = line(&[0.0, 2.0, 7.0]);
        let p = Partition::from_assignment(vec![0, 0, 0], 1).unwrap();
        let r = homogeneity_report(&d, &p).unwrap();
        assert_eq!(r.per_subgroup_w2, vec![0.0]);
        assert_eq!(r.var_of_means, 0.0);
        assert!((r.mean_of_vars - r.total_var).abs() < 1e-15);
        assert_eq!(r.csv_rows().len(), 2);
    }

    #[test]
    fn unequal_sizes_keep_the_identity() {
        let d = line(&[0.0, 1.0, 4.0, 9.0, 16.0]);
        let p = Partition::from_assignment(vec![0, 1, 0, 1, 0], 2).unwrap();
        let r = homogeneity_report(&d, &p).unwrap();
        assert!(r.total_variance_residual().abs() < 1e-12);
    }
}
