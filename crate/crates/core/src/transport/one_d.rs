//! Closed-form Wasserstein-2 on the real line via the quantile coupling.

use crate::error::{Error, Result};

/// Squared W2 between two weighted sets of reals.
pub fn w2_1d_sq(a: &[f64], wa: &[f64], b: &[f64], wb: &[f64]) -> Result<f64> {
    check(a, wa)?;
    check(b, wb)?;
    let ia = sorted_order(a);
    let ib = sorted_order(b);
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (wa[ia[0]], wb[ib[0]]);
    let mut terms = Vec::with_capacity(a.len() + b.len());
    const EPS: f64 = 1e-15;
    loop {
        let t = ra.min(rb);
        let d = a[ia[i]] - b[ib[j]];
        terms.push(t * d * d);
        ra -= t;
        rb -= t;
        if ra <= EPS {
            i += 1;
            if i == a.len() {
                break;
            }
            ra = wa[ia[i]];
        }
        if rb <= EPS {
            j += 1;
            if j == b.len() {
                break;
            }
            rb = wb[ib[j]];
        }
    }
    Ok(crate::stats::pairwise_sum(&terms))
}

/// Squared W2 between uniform measures on `a` and `b`, using exact integer
/// bookkeeping of the cumulative mass (unit `1/(|a|·|b|)`).
pub fn w2_1d_uniform_sq(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite support point".into()));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let (n, m) = (sa.len(), sb.len());
    // Each atom of `a` carries m units, each atom of `b` carries n units.
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (m, n);
    let mut terms = Vec::with_capacity(n + m);
    while i < n && j < m {
        let t = ra.min(rb);
        let d = sa[i] - sb[j];
        terms.push(t as f64 * d * d);
        ra -= t;
        rb -= t;
        if ra == 0 {
            i += 1;
            ra = m;
        }
        if rb == 0 {
            j += 1;
            rb = n;
        }
    }
    Ok(crate::stats::pairwise_sum(&terms) / (n * m) as f64)
}

/// W2 distance (not squared) between two weighted sets of reals.
pub fn w2_1d(a: &[f64], wa: &[f64], b: &[f64], wb: &[f64]) -> Result<f64> {
    w2_1d_sq(a, wa, b, wb).map(f64::sqrt)
}

fn check(x: &[f64], w: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if x.len() != w.len() {
        return Err(Error::LengthMismatch {
            what: "weights",
            expected: x.len(),
            actual: w.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite support point".into()));
    }
    let sum: f64 = w.iter().sum();
    if w.iter().any(|&v| !(v >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
        return Err(Error::WeightNormalization { sum });
    }
    Ok(())
}

fn sorted_order(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&p, &q| x[p].total_cmp(&x[q]));
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uni(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    #[test]
    fn examples() {
        assert_eq!(w2_1d(&[0.0, 1.0], &uni(2), &[0.0, 1.0], &uni(2)).unwrap(), 0.0);
        assert!((w2_1d(&[0.0, 2.0], &uni(2), &[1.0, 3.0], &uni(2)).unwrap() - 1.0).abs() < 1e-15);
        assert!((w2_1d_uniform_sq(&[2.0, 0.0], &[3.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_versus_four_points() {
        // {0,3} against {0,1,2,3}: quantile coupling pairs 0→{0,1} and 3→{2,3}.
        let v = w2_1d_uniform_sq(&[0.0, 3.0], &[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        let w = w2_1d_sq(&[0.0, 3.0], &uni(2), &[0.0, 1.0, 2.0, 3.0], &uni(4)).unwrap();
        assert!((w - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(w2_1d(&[0.0], &[0.5], &[1.0], &[1.0]).is_err());
    }
}
