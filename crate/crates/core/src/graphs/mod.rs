//! Stochastic block models, Laplacian spectra and spectral embeddings.

mod jacobi;

use std::path::Path;

use ndarray::{Array1, Array2};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::rng::Rng;
use crate::stats::{scalar_mean, scalar_variance};
use crate::transport::w2_1d_uniform_sq;

pub use jacobi::symmetric_eigen;

/// Simple undirected graph stored as a dense adjacency matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adj: vec![false; n * n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(i, j);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Invalid(format!("edge ({u}, {v}) out of range for {n} nodes")));
            }
            if u == v {
                return Err(Error::Invalid(format!("self-loop at node {u}")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            self.adj[u * self.n + v] = true;
            self.adj[v * self.n + u] = true;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.n + v]
    }

    pub fn degree(&self, u: usize) -> usize {
        (0..self.n).filter(|&v| self.has_edge(u, v)).count()
    }

    /// Edges `(u, v)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| (u + 1..self.n).map(move |v| (u, v)))
            .filter(|&(u, v)| self.has_edge(u, v))
            .collect()
    }

    /// Induced subgraph on `nodes`, relabelled `0..nodes.len()` in the given order.
    pub fn induced(&self, nodes: &[usize]) -> Graph {
        let mut g = Graph::empty(nodes.len());
        for (a, &u) in nodes.iter().enumerate() {
            for (b, &v) in nodes.iter().enumerate().skip(a + 1) {
                if self.has_edge(u, v) {
                    g.add_edge(a, b);
                }
            }
        }
        g
    }

    /// Unnormalized Laplacian `D − A`.
    pub fn laplacian(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.n, self.n), |(i, j)| {
            if i == j {
                self.degree(i) as f64
            } else if self.has_edge(i, j) {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// Connected components, each sorted, ordered by smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for v in 0..self.n {
                    if self.has_edge(u, v) && !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Writes `u,v` rows (0-based, `u < v`) under a header.
    pub fn write_edge_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref())?;
        w.write_record(["u", "v"])?;
        for (u, v) in self.edges() {
            w.write_record([u.to_string(), v.to_string()])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        })
    }

    /// Reads `u,v` rows; the node count is given since isolated nodes have no rows.
    pub fn read_edge_csv(path: impl AsRef<Path>, n: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path.as_ref())?;
        let mut edges = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let cell = |column: usize| -> Result<usize> {
                let s = rec.get(column).unwrap_or("");
                s.parse().map_err(|e: std::num::ParseIntError| Error::Parse {
                    row,
                    column,
                    value: s.to_string(),
                    reason: e.to_string(),
                })
            };
            edges.push((cell(0)?, cell(1)?));
        }
        Self::from_edges(n, &edges)
    }
}

/// Samples a stochastic block model: each pair of distinct nodes is joined
/// independently with the probability of their blocks. Nodes are numbered
/// block by block.
pub fn sbm_generate(block_sizes: &[usize], probs: &[Vec<f64>], rng: &mut Rng) -> Result<Graph> {
    let b = block_sizes.len();
    if probs.len() != b || probs.iter().any(|r| r.len() != b) {
        return Err(Error::Invalid("edge probability matrix must be square over blocks".into()));
    }
    for i in 0..b {
        for j in 0..b {
            let p = probs[i][j];
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability(p));
            }
            if p != probs[j][i] {
                return Err(Error::Invalid("edge probability matrix must be symmetric".into()));
            }
        }
    }
    let block: Vec<usize> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(k, &s)| std::iter::repeat_n(k, s))
        .collect();
    let n = block.len();
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < probs[block[u]][block[v]] {
                g.add_edge(u, v);
            }
        }
    }
    Ok(g)
}

/// Eigenvalues of `D − A`, ascending.
pub fn laplacian_spectrum(g: &Graph) -> Vec<f64> {
    if g.n() == 0 {
        return Vec::new();
    }
    symmetric_eigen(&g.laplacian()).0.to_vec()
}

/// Node coordinates from the eigenvectors of the `dims` smallest eigenvalues
/// after the first. The null space is replaced by a canonical basis (the
/// normalized constant vector, then Gram–Schmidt on component indicators)
/// so that disconnected graphs embed reproducibly. Each column has its
/// largest-magnitude entry positive.
pub fn spectral_embedding(g: &Graph, dims: usize) -> Result<Array2<f64>> {
    let n = g.n();
    if dims == 0 || dims >= n {
        return Err(Error::Invalid(format!("embedding dimension {dims} needs 0 < dims < {n}")));
    }
    let (values, mut vectors) = symmetric_eigen(&g.laplacian());
    let comps = g.components();
    let z = comps.len();
    let basis = null_space_basis(n, &comps);
    for (k, b) in basis.iter().enumerate() {
        vectors.column_mut(k).assign(b);
    }
    debug_assert!(values.iter().take(z).all(|v| v.abs() < 1e-6 * (1.0 + n as f64)));

    let mut out = Array2::zeros((n, dims));
    for c in 0..dims {
        let mut col = vectors.column(c + 1).to_owned();
        let (arg, _) = col
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bv), (i, &x)| if x.abs() > bv + 1e-12 { (i, x.abs()) } else { (bi, bv) });
        if col[arg] < 0.0 {
            col.mapv_inplace(|x| -x);
        }
        out.column_mut(c).assign(&col);
    }
    Ok(out)
}

fn null_space_basis(n: usize, comps: &[Vec<usize>]) -> Vec<Array1<f64>> {
    let mut basis: Vec<Array1<f64>> = vec![Array1::from_elem(n, 1.0 / (n as f64).sqrt())];
    for comp in comps {
        if basis.len() == comps.len() {
            break;
        }
        let mut v = Array1::zeros(n);
        comp.iter().for_each(|&i| v[i] = 1.0);
        for b in &basis {
            let proj = v.dot(b);
            v = v - b * proj;
        }
        let norm = v.dot(&v).sqrt();
        if norm > 1e-10 {
            basis.push(v / norm);
        }
    }
    basis
}

/// `W2` between the uniform measures on the spectra of `g` and of the
/// subgraph induced by `nodes`.
pub fn subgraph_spectrum_w2(g: &Graph, nodes: &[usize]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let full = laplacian_spectrum(g);
    let sub = laplacian_spectrum(&g.induced(nodes));
    Ok(w2_1d_uniform_sq(&full, &sub)?.max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub graph_spectrum: Vec<f64>,
    pub subgraph_spectra: Vec<Vec<f64>>,
    pub w2: Vec<f64>,
    pub mean_w2: f64,
    /// Population standard deviation of `w2`.
    pub std_w2: f64,
}

pub fn spectrum_report(g: &Graph, part: &Partition) -> Result<SpectrumReport> {
    part.validate(g.n(), false)?;
    let graph_spectrum = laplacian_spectrum(g);
    let mut subgraph_spectra = Vec::new();
    let mut w2 = Vec::new();
    for nodes in part.groups() {
        let s = laplacian_spectrum(&g.induced(&nodes));
        w2.push(w2_1d_uniform_sq(&graph_spectrum, &s)?.max(0.0).sqrt());
        subgraph_spectra.push(s);
    }
    Ok(SpectrumReport {
        mean_w2: scalar_mean(&w2),
        std_w2: scalar_variance(&w2).sqrt(),
        graph_spectrum,
        subgraph_spectra,
        w2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::{w2_exact, DiscreteMeasure};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn closed_form_spectra() {
        assert!(close(&laplacian_spectrum(&Graph::empty(4)), &[0.0; 4], 1e-15));
        assert!(close(&laplacian_spectrum(&Graph::complete(5)), &[0.0, 5.0, 5.0, 5.0, 5.0], 1e-10));
        let p3 = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(close(&laplacian_spectrum(&p3), &[0.0, 1.0, 3.0], 1e-12));
    }

    #[test]
    fn sbm_extremes() {
        let zero = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let one = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert_eq!(sbm_generate(&[3, 4], &zero, &mut Rng::new(0)).unwrap(), Graph::empty(7));
        assert_eq!(sbm_generate(&[3, 4], &one, &mut Rng::new(0)).unwrap(), Graph::complete(7));
        let bad = vec![vec![1.5]];
        assert!(sbm_generate(&[3], &bad, &mut Rng::new(0)).is_err());
        let asym = vec![vec![0.1, 0.2], vec![0.3, 0.1]];
        assert!(sbm_generate(&[2, 2], &asym, &mut Rng::new(0)).is_err());
    }

    #[test]
    fn two_cliques_split_by_sign() {
        let mut g = Graph::empty(6);
        for (u, v) in [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)] {
            g.add_edge(u, v);
        }
        let e = spectral_embedding(&g, 1).unwrap();
        let s: Vec<f64> = e.column(0).iter().map(|x| x.signum()).collect();
        assert!(s[0] == s[1] && s[1] == s[2]);
        assert!(s[3] == s[4] && s[4] == s[5]);
        assert!(s[0] != s[3]);
    }

    #[test]
    fn complete_graph_embedding_is_orthonormal() {
        let g = Graph::complete(6);
        let e = spectral_embedding(&g, 2).unwrap();
        let gram = e.t().dot(&e);
        assert!((gram[[0, 0]] - 1.0).abs() < 1e-12 && (gram[[1, 1]] - 1.0).abs() < 1e-12);
        assert!(gram[[0, 1]].abs() < 1e-12);
        let l = g.laplacian();
        for c in 0..2 {
            let r = l.dot(&e.column(c)) - &e.column(c) * 6.0;
            assert!(r.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-8 * 6.0 * 6.0);
        }
    }

    #[test]
    fn subgraph_distances() {
        let k4 = Graph::complete(4);
        assert_eq!(subgraph_spectrum_w2(&k4, &[0, 1, 2, 3]).unwrap(), 0.0);
        assert_eq!(subgraph_spectrum_w2(&Graph::empty(5), &[1, 3]).unwrap(), 0.0);
        let d = subgraph_spectrum_w2(&k4, &[0, 1]).unwrap();
        let a = DiscreteMeasure::uniform(Array2::from_shape_vec((4, 1), vec![0.0, 4.0, 4.0, 4.0]).unwrap()).unwrap();
        let b = DiscreteMeasure::uniform(Array2::from_shape_vec((2, 1), vec![0.0, 2.0]).unwrap()).unwrap();
        let (lp, _) = w2_exact(&a, &b).unwrap();
        assert!((d - lp).abs() < 1e-12);
        // Quantile coupling: 0→0 and 4→0, 4→2, 4→2 with mass 1/4 each: (16 + 4 + 4)/4 = 6.
        assert!((d * d - 6.0).abs() < 1e-12);
        assert!(subgraph_spectrum_w2(&k4, &[]).is_err());
    }

    #[test]
    fn edge_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let g = Graph::from_edges(5, &[(0, 3), (1, 2), (2, 4)]).unwrap();
        g.write_edge_csv(&path).unwrap();
        assert_eq!(Graph::read_edge_csv(&path, 5).unwrap(), g);
    }
}
