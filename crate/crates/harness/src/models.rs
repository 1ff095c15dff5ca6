//! Downstream models for the classification and regression studies.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

/// Column means and standard deviations (population); zero spread maps to 1.
fn standardizer(x: ArrayView2<f64>) -> (Array1<f64>, Array1<f64>) {
    let mean = x.mean_axis(Axis(0)).unwrap();
    let sd = x.var_axis(Axis(0), 0.0).mapv(|v| if v > 0.0 { v.sqrt() } else { 1.0 });
    (mean, sd)
}

/// Multinomial logistic regression fitted by full-batch gradient descent on
/// features standardized with training statistics.
#[derive(Debug, Clone)]
pub struct Logistic {
    mean: Array1<f64>,
    sd: Array1<f64>,
    /// `(d + 1) × classes`; the last row is the intercept.
    weights: Array2<f64>,
}

fn design(x: ArrayView2<f64>, mean: &Array1<f64>, sd: &Array1<f64>) -> Array2<f64> {
    let (n, d) = x.dim();
    let mut z = Array2::ones((n, d + 1));
    for i in 0..n {
        for j in 0..d {
            z[[i, j]] = (x[[i, j]] - mean[j]) / sd[j];
        }
    }
    z
}

fn softmax_rows(mut s: Array2<f64>) -> Array2<f64> {
    for mut row in s.rows_mut() {
        let mx = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - mx).exp());
        let total = row.sum();
        row /= total;
    }
    s
}

impl Logistic {
    pub fn fit(x: ArrayView2<f64>, y: &[usize], classes: usize, iterations: usize, step: f64) -> Self {
        let (mean, sd) = standardizer(x);
        let z = design(x, &mean, &sd);
        let n = z.nrows() as f64;
        let mut onehot = Array2::zeros((z.nrows(), classes));
        for (i, &c) in y.iter().enumerate() {
            onehot[[i, c]] = 1.0;
        }
        let mut weights = Array2::zeros((z.ncols(), classes));
        for _ in 0..iterations {
            let p = softmax_rows(z.dot(&weights));
            let grad = z.t().dot(&(p - &onehot)) / n;
            weights.scaled_add(-step, &grad);
        }
        Self { mean, sd, weights }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<usize> {
        let s = design(x, &self.mean, &self.sd).dot(&self.weights);
        s.rows()
            .into_iter()
            .map(|r| {
                let mut best = 0;
                for (j, &v) in r.iter().enumerate() {
                    if v > r[best] {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len().max(1) as f64
}

/// Least squares with intercept through the normal equations.
#[derive(Debug, Clone)]
pub struct LinearFit {
    /// Slopes followed by the intercept.
    pub coefficients: Array1<f64>,
    /// Set when the normal matrix was singular and a `1e-8` ridge was added.
    pub ridge: bool,
}

pub const RIDGE_PENALTY: f64 = 1e-8;

fn with_intercept(x: ArrayView2<f64>) -> Array2<f64> {
    let (n, d) = x.dim();
    let mut z = Array2::ones((n, d + 1));
    z.slice_mut(ndarray::s![.., ..d]).assign(&x);
    z
}

/// Cholesky solve of `a·x = b`; `None` when `a` is not numerically positive definite.
fn cholesky_solve(a: &Array2<f64>, b: &Array1<f64>) -> Option<Array1<f64>> {
    let n = a.nrows();
    let scale = (0..n).map(|i| a[[i, i]].abs()).fold(0.0, f64::max).max(1.0);
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[[i, k]] * l[[j, k]]).sum();
            if i == j {
                let d = a[[i, i]] - s;
                if d <= 1e-12 * scale {
                    return None;
                }
                l[[i, i]] = d.sqrt();
            } else {
                l[[i, j]] = (a[[i, j]] - s) / l[[j, j]];
            }
        }
    }
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[[i, k]] * y[k]).sum();
        y[i] = (b[i] - s) / l[[i, i]];
    }
    let mut x = Array1::zeros(n);
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[[k, i]] * x[k]).sum();
        x[i] = (y[i] - s) / l[[i, i]];
    }
    Some(x)
}

impl LinearFit {
    pub fn fit(x: ArrayView2<f64>, y: ArrayView1<f64>) -> Self {
        let z = with_intercept(x);
        let mut a = z.t().dot(&z);
        let b = z.t().dot(&y);
        if let Some(coefficients) = cholesky_solve(&a, &b) {
            return Self {
                coefficients,
                ridge: false,
            };
        }
        let mut penalty = RIDGE_PENALTY;
        loop {
            for i in 0..a.nrows() {
                a[[i, i]] += penalty;
            }
            if let Some(coefficients) = cholesky_solve(&a, &b) {
                return Self {
                    coefficients,
                    ridge: true,
                };
            }
            // Only reachable when the data themselves are huge in scale.
            penalty *= 10.0;
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Array1<f64> {
        with_intercept(x).dot(&self.coefficients)
    }
}

pub fn mse(pred: ArrayView1<f64>, truth: ArrayView1<f64>) -> f64 {
    let n = truth.len().max(1) as f64;
    pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn separable_blobs_are_classified_perfectly() {
        let x = array![[0.0, 0.0], [0.5, 0.2], [10.0, 0.0], [10.3, 0.4], [0.0, 10.0], [0.2, 9.7]];
        let y = [0, 0, 1, 1, 2, 2];
        let model = Logistic::fit(x.view(), &y, 3, 500, 0.1);
        assert_eq!(accuracy(&model.predict(x.view()), &y), 1.0);
    }

    #[test]
    fn exact_linear_target_has_zero_error() {
        let x = array![[1.0], [2.0], [4.0], [7.0]];
        let y = x.column(0).mapv(|v| 3.0 * v - 2.0);
        let fit = LinearFit::fit(x.view(), y.view());
        assert!(!fit.ridge);
        assert!(mse(fit.predict(x.view()).view(), y.view()) < 1e-20);
        assert!((fit.coefficients[0] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn collinear_predictors_use_the_ridge() {
        let x = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        let y = array![1.0, 2.0, 3.0];
        let fit = LinearFit::fit(x.view(), y.view());
        assert!(fit.ridge);
        assert!(mse(fit.predict(x.view()).view(), y.view()) < 1e-6);
    }
}
