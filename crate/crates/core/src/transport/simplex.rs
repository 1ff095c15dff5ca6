//! Transportation-problem network simplex.
//!
//! Basis is a spanning tree over row and column nodes with `n + m − 1`
//! cells, started from the northwest corner rule. Pricing is Dantzig's
//! most-negative reduced cost; after a run of degenerate pivots it switches
//! to Bland's first-index rule, which cannot cycle.

use ndarray::ArrayView2;

use crate::error::{Error, Result};

const DEGENERATE_RUN: usize = 64;

/// Optimal flow for supplies `a`, demands `b` (equal totals) and `cost`.
/// Returns nonzero `(i, j, mass)` entries.
pub fn solve(a: &[f64], b: &[f64], cost: ArrayView2<f64>) -> Result<Vec<(usize, usize, f64)>> {
    let (n, m) = cost.dim();
    if a.len() != n || b.len() != m {
        return Err(Error::DimensionMismatch(a.len() * b.len(), n * m));
    }
    if n == 0 || m == 0 {
        return Ok(Vec::new());
    }
    let scale = cost.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    let eps = 1e-13 * (1.0 + scale);

    let (mut basis, mut flow) = northwest_corner(a, b);
    let mut is_basic = vec![false; n * m];
    for &(i, j) in &basis {
        is_basic[i * m + j] = true;
    }

    let mut u = vec![0.0; n];
    let mut v = vec![0.0; m];
    let mut degenerate = 0usize;
    let max_pivots = 50 * (n + m) * n.max(m) + 1000;

    for _ in 0..max_pivots {
        potentials(&basis, cost, &mut u, &mut v);

        let bland = degenerate >= DEGENERATE_RUN;
        let mut entering = None;
        let mut best = -eps;
        'scan: for i in 0..n {
            for j in 0..m {
                if is_basic[i * m + j] {
                    continue;
                }
                let r = cost[[i, j]] - u[i] - v[j];
                if r < best {
                    entering = Some((i, j));
                    if bland {
                        break 'scan;
                    }
                    best = r;
                }
            }
        }
        let Some((ei, ej)) = entering else {
            let out = basis
                .iter()
                .zip(&flow)
                .filter(|(_, &f)| f > 0.0)
                .map(|(&(i, j), &f)| (i, j, f))
                .collect();
            return Ok(out);
        };

        // Tree path from row ei to column ej; edges alternate -, +, -, ...
        let path = tree_path(&basis, n, m, ei, ej);
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (k, &e) in path.iter().enumerate() {
            if k % 2 == 0 {
                let better = flow[e] < theta
                    || (bland && flow[e] == theta && basis[e] < basis[leave]);
                if better {
                    theta = flow[e];
                    leave = e;
                }
            }
        }
        let theta = theta.max(0.0);
        for (k, &e) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[e] = (flow[e] - theta).max(0.0);
            } else {
                flow[e] += theta;
            }
        }
        degenerate = if theta > 0.0 { 0 } else { degenerate + 1 };

        let (li, lj) = basis[leave];
        is_basic[li * m + lj] = false;
        is_basic[ei * m + ej] = true;
        basis[leave] = (ei, ej);
        flow[leave] = theta;
    }
    Err(Error::Invalid("transportation simplex did not converge".into()))
}

fn northwest_corner(a: &[f64], b: &[f64]) -> (Vec<(usize, usize)>, Vec<f64>) {
    let (n, m) = (a.len(), b.len());
    let mut basis = Vec::with_capacity(n + m - 1);
    let mut flow = Vec::with_capacity(n + m - 1);
    let (mut i, mut j) = (0, 0);
    let (mut s, mut d) = (a[0], b[0]);
    loop {
        let t = s.min(d).max(0.0);
        basis.push((i, j));
        flow.push(t);
        s -= t;
        d -= t;
        if i == n - 1 && j == m - 1 {
            break;
        }
        if j == m - 1 || (i < n - 1 && s <= d) {
            i += 1;
            s = a[i];
        } else {
            j += 1;
            d = b[j];
        }
    }
    (basis, flow)
}

fn potentials(basis: &[(usize, usize)], cost: ArrayView2<f64>, u: &mut [f64], v: &mut [f64]) {
    let (n, m) = cost.dim();
    let adj = adjacency(basis, n, m);
    let mut seen = vec![false; n + m];
    let mut stack = vec![0usize];
    seen[0] = true;
    u[0] = 0.0;
    while let Some(node) = stack.pop() {
        for &e in &adj[node] {
            let (i, j) = basis[e];
            let other = if node < n { n + j } else { i };
            if seen[other] {
                continue;
            }
            seen[other] = true;
            if node < n {
                v[j] = cost[[i, j]] - u[i];
            } else {
                u[i] = cost[[i, j]] - v[j];
            }
            stack.push(other);
        }
    }
}

fn adjacency(basis: &[(usize, usize)], n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n + m];
    for (e, &(i, j)) in basis.iter().enumerate() {
        adj[i].push(e);
        adj[n + j].push(e);
    }
    adj
}

/// Basis edges on the tree path from row node `ri` to column node `cj`.
fn tree_path(basis: &[(usize, usize)], n: usize, m: usize, ri: usize, cj: usize) -> Vec<usize> {
    let adj = adjacency(basis, n, m);
    let target = n + cj;
    let mut parent_edge = vec![usize::MAX; n + m];
    let mut seen = vec![false; n + m];
    let mut queue = std::collections::VecDeque::from([ri]);
    seen[ri] = true;
    while let Some(node) = queue.pop_front() {
        if node == target {
            break;
        }
        for &e in &adj[node] {
            let (i, j) = basis[e];
            let other = if node < n { n + j } else { i };
            if !seen[other] {
                seen[other] = true;
                parent_edge[other] = e;
                queue.push_back(other);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = target;
    while node != ri {
        let e = parent_edge[node];
        path.push(e);
        let (i, j) = basis[e];
        node = if node < n { n + j } else { i };
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn total(entries: &[(usize, usize, f64)], c: ArrayView2<f64>) -> f64 {
        entries.iter().map(|&(i, j, f)| f * c[[i, j]]).sum()
    }

    #[test]
    fn classic_textbook_instance() {
        // Optimum 480 cross-checked with an independent dense LP solver.
        let a = [20.0, 30.0, 25.0];
        let b = [10.0, 10.0, 35.0, 20.0];
        let c = array![[2.0, 3.0, 11.0, 7.0], [1.0, 0.0, 6.0, 1.0], [5.0, 8.0, 15.0, 9.0]];
        let e = solve(&a, &b, c.view()).unwrap();
        let t = total(&e, c.view());
        assert!((t - 480.0).abs() < 1e-9, "{t}");
    }

    #[test]
    fn marginals_hold() {
        let a = [0.5, 0.25, 0.25];
        let b = [0.2, 0.2, 0.2, 0.2, 0.2];
        let c = ndarray::Array2::from_shape_fn((3, 5), |(i, j)| ((i * 7 + j * 3) % 5) as f64);
        let e = solve(&a, &b, c.view()).unwrap();
        let mut rs = [0.0; 3];
        let mut cs = [0.0; 5];
        for &(i, j, f) in &e {
            rs[i] += f;
            cs[j] += f;
        }
        for (x, y) in rs.iter().zip(&a) {
            assert!((x - y).abs() < 1e-12);
        }
        for (x, y) in cs.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
