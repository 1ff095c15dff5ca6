//! Enumeration of `Q(P)`: all subgroup partitions that take exactly one
//! member of every cluster per subgroup.

use crate::combinatorics::{factorial, Permutations};
use crate::error::{Error, Result};
use crate::partition::Partition;

/// Number of members of `Q(P)` for `k` clusters of size `c`, with the first
/// cluster's order fixed: `(c!)^(k−1)`.
pub fn qp_count(k: usize, c: usize) -> f64 {
    factorial(c).powi(k.saturating_sub(1) as i32)
}

/// Iterator over `Q(P)`. Subgroup `j` holds member `j` of the first cluster
/// and member `π_p(j)` of every other cluster `p`.
#[derive(Debug, Clone)]
pub struct QpIter {
    clusters: Vec<Vec<usize>>,
    perms: Vec<Vec<usize>>,
    odometer: Vec<usize>,
    n: usize,
    done: bool,
}

pub fn enumerate_qp(clusters: &[Vec<usize>], n: usize, budget: f64) -> Result<QpIter> {
    let c = clusters.first().map_or(0, Vec::len);
    if c == 0 {
        return Err(Error::EmptyDataset);
    }
    for (index, cl) in clusters.iter().enumerate() {
        if cl.len() != c {
            return Err(Error::UnequalClusters {
                index,
                expected: c,
                actual: cl.len(),
            });
        }
    }
    if clusters.iter().map(Vec::len).sum::<usize>() != n {
        return Err(Error::LengthMismatch {
            what: "cluster members",
            expected: n,
            actual: clusters.iter().map(Vec::len).sum(),
        });
    }
    let needed = qp_count(clusters.len(), c);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(QpIter {
        clusters: clusters.to_vec(),
        perms: Permutations::new(c).collect(),
        odometer: vec![0; clusters.len() - 1],
        n,
        done: false,
    })
}

impl Iterator for QpIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let c = self.clusters[0].len();
        let mut assignment = vec![0usize; self.n];
        for (j, &i) in self.clusters[0].iter().enumerate() {
            assignment[i] = j;
        }
        for (p, &t) in self.odometer.iter().enumerate() {
            let perm = &self.perms[t];
            for j in 0..c {
                assignment[self.clusters[p + 1][perm[j]]] = j;
            }
        }
        let mut pos = 0;
        loop {
            if pos == self.odometer.len() {
                self.done = true;
                break;
            }
            self.odometer[pos] += 1;
            if self.odometer[pos] < self.perms.len() {
                break;
            }
            self.odometer[pos] = 0;
            pos += 1;
        }
        Some(Partition::from_assignment(assignment, c).expect("indices in range"))
    }
}
