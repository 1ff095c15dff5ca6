//! Cyclic Jacobi eigensolver for small dense symmetric matrices.

use ndarray::{Array1, Array2};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues ascending and the matching unit eigenvectors as columns.
/// Equal eigenvalues keep the order in which the rotations produced them.
pub fn symmetric_eigen(a: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    let mut a = a.clone();
    let mut v = Array2::<f64>::eye(n);
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = 1e-12 * norm;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[[i, j]] * a[[i, j]])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[[k, p]], a[[k, q]]);
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                a[[p, q]] = 0.0;
                a[[q, p]] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].total_cmp(&a[[j, j]]));
    let values = Array1::from_iter(order.iter().map(|&i| a[[i, i]]));
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| v[[r, order[c]]]);
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn two_by_two() {
        let (w, v) = symmetric_eigen(&array![[2.0, 1.0], [1.0, 2.0]]);
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] - 3.0).abs() < 1e-14);
        assert!((v[[0, 1]].abs() - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn residuals_are_small() {
        let a = Array2::from_shape_fn((7, 7), |(i, j)| ((i * 3 + j * 3 + i * j) % 5) as f64 - 2.0);
        let a = &a + &a.t();
        let (w, v) = symmetric_eigen(&a);
        let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        for k in 0..7 {
            let col = v.column(k);
            let r = a.dot(&col) - &col * w[k];
            assert!(r.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1e-10 * norm);
        }
        let vtv = v.t().dot(&v);
        for i in 0..7 {
            for j in 0..7 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((vtv[[i, j]] - e).abs() < 1e-12);
            }
        }
    }
}
