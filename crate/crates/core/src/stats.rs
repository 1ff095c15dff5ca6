//! Small numeric helpers shared across modules.
//!
//! Variance here is always the population variance of the uniform empirical
//! measure: `var(X) = (1/n) Σ ‖x − mean(X)‖²`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

/// Pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn mean_point(points: ArrayView2<f64>) -> Array1<f64> {
    points
        .mean_axis(Axis(0))
        .unwrap_or_else(|| Array1::zeros(points.ncols()))
}

/// Population variance of a point cloud (trace of the covariance).
pub fn variance(points: ArrayView2<f64>) -> f64 {
    let n = points.nrows();
    if n == 0 {
        return 0.0;
    }
    let mu = mean_point(points);
    let terms: Vec<f64> = points.rows().into_iter().map(|r| sq_dist(r, mu.view())).collect();
    pairwise_sum(&terms) / n as f64
}

/// Population variance of a scalar sequence.
pub fn scalar_variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mu = pairwise_sum(values) / n;
    let dev: Vec<f64> = values.iter().map(|v| (v - mu) * (v - mu)).collect();
    pairwise_sum(&dev) / n
}

pub fn scalar_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    pairwise_sum(values) / values.len() as f64
}

/// Rows of `points` selected by `indices`.
pub fn select_rows(points: ArrayView2<f64>, indices: &[usize]) -> Array2<f64> {
    points.select(Axis(0), indices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn variance_of_symmetric_cloud() {
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        assert!((variance(x.view()) - 1.25).abs() < 1e-15);
        let y = array![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
        assert!((variance(y.view()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }

    #[test]
    fn scalar_variance_basics() {
        assert_eq!(scalar_variance(&[2.0, 2.0, 2.0]), 0.0);
        assert!((scalar_variance(&[0.0, 2.0]) - 1.0).abs() < 1e-15);
    }
}
