//! The two WHOMP partitioners built on a balanced k-means clustering `P`.
//!
//! With `m` subgroups, `P` has `K = N/m` clusters of size `m` and every
//! subgroup takes exactly one member from each cluster. The random variant
//! draws that selection uniformly; the matching variant lines clusters up
//! through their Wasserstein barycenter.

use ndarray::Array2;
use rand::seq::SliceRandom;

use crate::barycenter::{barycenter, BarycenterInit, BarycenterOptions, BarycenterResult};
use crate::clustering::{balanced_kmeans, BalancedKMeansResult, KMeansOptions};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::rng::Rng;
use crate::stats::{select_rows, sq_dist};
use crate::transport::hungarian;

/// Subgroup partition together with the intermediate objects that built it.
#[derive(Debug, Clone)]
pub struct WhompOutcome {
    pub partition: Partition,
    pub clusters: BalancedKMeansResult,
    /// Only set by the matching variant.
    pub barycenter: Option<BarycenterResult>,
}

impl WhompOutcome {
    pub fn cluster_groups(&self) -> Vec<Vec<usize>> {
        self.clusters.partition.groups()
    }
}

pub(crate) fn check_groups(n: usize, m: usize, strict: bool) -> Result<usize> {
    if m == 0 || m > n {
        return Err(Error::InvalidGroupCount { groups: m, n });
    }
    if n % m != 0 && strict {
        return Err(Error::NotDivisible { n, groups: m });
    }
    Ok(n.div_ceil(m))
}

/// Uniform draw from `Q(P)`: every cluster is shuffled once and the
/// clusters are dealt one after another, round-robin, into `m` subgroups.
/// Clusters of size `m` give one member to each subgroup; smaller clusters
/// (when `m` does not divide `N`) give at most one.
pub fn deal_from_clusters(clusters: &[Vec<usize>], m: usize, n: usize, rng: &mut Rng) -> Result<Partition> {
    let mut assignment = vec![usize::MAX; n];
    let mut pos = 0usize;
    for cluster in clusters {
        if cluster.len() > m {
            return Err(Error::Invalid(format!("cluster of size {} exceeds {m} subgroups", cluster.len())));
        }
        let mut members = cluster.clone();
        members.shuffle(rng);
        for i in members {
            assignment[i] = pos % m;
            pos += 1;
        }
    }
    if assignment.contains(&usize::MAX) {
        return Err(Error::Invalid("clusters do not cover every item".into()));
    }
    Partition::from_assignment(assignment, m)
}

/// WHOMP Random: balanced k-means, then a uniform draw from `Q(P)`.
pub fn whomp_random(data: &Dataset, m: usize, kmeans: &KMeansOptions, strict: bool, rng: &mut Rng) -> Result<WhompOutcome> {
    let k = check_groups(data.len(), m, strict)?;
    let clusters = balanced_kmeans(data, k, kmeans, rng)?;
    let partition = deal_from_clusters(&clusters.partition.groups(), m, data.len(), rng)?;
    Ok(WhompOutcome {
        partition,
        clusters,
        barycenter: None,
    })
}

/// WHOMP Matching: balanced k-means, the barycenter of the clusters (exact
/// when small enough, see [`crate::barycenter::barycenter`]), and
/// subgroup `j` formed by the cluster points matched to barycenter point `j`.
pub fn whomp_matching(
    data: &Dataset,
    m: usize,
    kmeans: &KMeansOptions,
    bary: &BarycenterOptions,
    strict: bool,
    rng: &mut Rng,
) -> Result<WhompOutcome> {
    let n = data.len();
    let k = check_groups(n, m, strict)?;
    let clusters = balanced_kmeans(data, k, kmeans, rng)?;
    let groups = clusters.partition.groups();
    if n % m == 0 {
        let clouds: Vec<Array2<f64>> = groups.iter().map(|g| select_rows(data.points().view(), g)).collect();
        let b = barycenter(&clouds, bary)?;
        let partition = subgroups_from_barycenter(&groups, &b, n)?;
        Ok(WhompOutcome {
            partition,
            clusters,
            barycenter: Some(b),
        })
    } else {
        let partition = partial_matching(data, &groups, m, bary)?;
        Ok(WhompOutcome {
            partition,
            clusters,
            barycenter: None,
        })
    }
}

/// Subgroup `j` collects `T_p(bar x_j)` over every cluster `p`.
pub fn subgroups_from_barycenter(clusters: &[Vec<usize>], b: &BarycenterResult, n: usize) -> Result<Partition> {
    let c = b.support.nrows();
    let mut assignment = vec![usize::MAX; n];
    for (cluster, sigma) in clusters.iter().zip(&b.matchings) {
        for j in 0..c {
            assignment[cluster[sigma[j]]] = j;
        }
    }
    Partition::from_assignment(assignment, c)
}

/// Matching variant for clusters of unequal size (all at most `m`): a
/// barycenter with `m` support points where each cluster is matched into a
/// subset of the support, followed by a repair pass that moves members
/// between subgroups (within their cluster) until sizes differ by at most one.
fn partial_matching(data: &Dataset, clusters: &[Vec<usize>], m: usize, opts: &BarycenterOptions) -> Result<Partition> {
    let x = data.points();
    let clouds: Vec<Array2<f64>> = clusters.iter().map(|g| select_rows(x.view(), g)).collect();

    let mut starts: Vec<Array2<f64>> = match &opts.init {
        BarycenterInit::Support(s) => vec![s.clone()],
        BarycenterInit::Cluster(p) => clouds.get(*p).filter(|c| c.nrows() == m).cloned().into_iter().collect(),
        BarycenterInit::Multistart => clouds.iter().filter(|c| c.nrows() == m).cloned().collect(),
    };
    let mut rng = Rng::new(opts.seed);
    let want = starts.len().max(clusters.len()) + 1;
    while starts.len() < want {
        let picks = rand::seq::index::sample(&mut rng, data.len(), m).into_vec();
        starts.push(select_rows(x.view(), &picks));
    }

    let mut best: Option<(f64, Array2<f64>, Vec<Vec<usize>>)> = None;
    for start in starts {
        let (cost, support, slots) = partial_fixed_point(&clouds, start, opts.tol, opts.max_iter);
        if best.as_ref().is_none_or(|b| cost < b.0) {
            best = Some((cost, support, slots));
        }
    }
    let (_, support, mut slots) = best.expect("at least one start");

    // Balance repair: move the cheapest eligible member from a largest to a
    // smallest subgroup. Some cluster is present in the larger subgroup and
    // absent from the smaller one, so a move always exists.
    loop {
        let mut sizes = vec![0usize; m];
        slots.iter().flatten().for_each(|&j| sizes[j] += 1);
        let (big, &max) = sizes.iter().enumerate().max_by_key(|(j, &s)| (s, std::cmp::Reverse(*j))).expect("m > 0");
        let (small, &min) = sizes.iter().enumerate().min_by_key(|(j, &s)| (s, *j)).expect("m > 0");
        if max - min <= 1 {
            break;
        }
        let mut pick: Option<(f64, usize, usize)> = None;
        for (p, s) in slots.iter().enumerate() {
            if s.contains(&small) {
                continue;
            }
            if let Some(i) = s.iter().position(|&j| j == big) {
                let xi = clouds[p].row(i);
                let delta = sq_dist(xi, support.row(small)) - sq_dist(xi, support.row(big));
                if pick.is_none_or(|b| delta < b.0) {
                    pick = Some((delta, p, i));
                }
            }
        }
        let (_, p, i) = pick.expect("a movable member exists");
        slots[p][i] = small;
    }

    let mut assignment = vec![0usize; data.len()];
    for (cluster, s) in clusters.iter().zip(&slots) {
        for (&item, &j) in cluster.iter().zip(s) {
            assignment[item] = j;
        }
    }
    Partition::from_assignment(assignment, m)
}

/// Fixed point for clusters no larger than the support: each cluster point
/// is matched to a distinct support point. Returns cost, support and the
/// support slot of every cluster point.
fn partial_fixed_point(clouds: &[Array2<f64>], mut support: Array2<f64>, tol: f64, max_iter: usize) -> (f64, Array2<f64>, Vec<Vec<usize>>) {
    let m = support.nrows();
    let assign = |s: &Array2<f64>| -> Vec<Vec<usize>> {
        clouds
            .iter()
            .map(|x| {
                let c = Array2::from_shape_fn((x.nrows(), m), |(i, j)| sq_dist(x.row(i), s.row(j)));
                hungarian::solve(c.view())
            })
            .collect()
    };
    let cost_of = |s: &Array2<f64>, slots: &[Vec<usize>]| -> f64 {
        let terms: Vec<f64> = clouds
            .iter()
            .zip(slots)
            .flat_map(|(x, sl)| sl.iter().enumerate().map(move |(i, &j)| sq_dist(x.row(i), s.row(j))))
            .collect();
        crate::stats::pairwise_sum(&terms) / m as f64
    };
    let mut slots = assign(&support);
    for _ in 0..max_iter.max(1) {
        let mut sums = Array2::<f64>::zeros(support.dim());
        let mut counts = vec![0usize; m];
        for (x, sl) in clouds.iter().zip(&slots) {
            for (i, &j) in sl.iter().enumerate() {
                let mut r = sums.row_mut(j);
                r += &x.row(i);
                counts[j] += 1;
            }
        }
        for j in 0..m {
            if counts[j] > 0 {
                let mean = &sums.row(j) / counts[j] as f64;
                support.row_mut(j).assign(&mean);
            }
        }
        let cost = cost_of(&support, &slots);
        let next = assign(&support);
        if cost - cost_of(&support, &next) <= tol {
            return (cost, support, slots);
        }
        slots = next;
    }
    let cost = cost_of(&support, &slots);
    (cost, support, slots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: &[f64]) -> Dataset {
        Dataset::from_rows(&values.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn four_points_two_subgroups() {
        let d = line(&[0.0, 0.1, 10.0, 10.1]);
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..40 {
            let out = whomp_random(&d, 2, &KMeansOptions::default(), false, &mut Rng::new(seed)).unwrap();
            let g = out.partition.groups();
            for grp in &g {
                assert_eq!(grp.iter().filter(|&&i| i < 2).count(), 1);
            }
            seen.insert(crate::oracle::canonical_groups(&g));
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let d = line(&[3.0, 1.0, 4.0, 1.5, 9.0, 2.6, 5.0, 3.5]);
        let a = whomp_random(&d, 2, &KMeansOptions::default(), false, &mut Rng::new(11)).unwrap();
        let b = whomp_random(&d, 2, &KMeansOptions::default(), false, &mut Rng::new(11)).unwrap();
        assert_eq!(a.partition, b.partition);
    }

    #[test]
    fn non_divisible_sizes() {
        let rows: Vec<Vec<f64>> = (0..11).map(|i| vec![(i as f64 * 1.7).sin(), i as f64]).collect();
        let d = Dataset::from_rows(&rows).unwrap();
        for m in [2, 3, 4, 5] {
            let r = whomp_random(&d, m, &KMeansOptions::default(), false, &mut Rng::new(1)).unwrap();
            r.partition.validate(11, true).unwrap();
            let w = whomp_matching(&d, m, &KMeansOptions::default(), &BarycenterOptions::default(), false, &mut Rng::new(1)).unwrap();
            w.partition.validate(11, true).unwrap();
            // Still at most one member of each cluster per subgroup.
            for grp in w.partition.groups() {
                let mut owners: Vec<usize> = grp.iter().map(|&i| w.clusters.partition.assignment()[i]).collect();
                owners.sort_unstable();
                owners.dedup();
                assert_eq!(owners.len(), grp.len());
            }
        }
        assert!(whomp_random(&d, 2, &KMeansOptions::default(), true, &mut Rng::new(1)).is_err());
    }

    #[test]
    fn identical_clusters_give_copies() {
        let d = line(&[0.0, 1.0, 5.0, 0.0, 1.0, 5.0, 0.0, 1.0, 5.0]);
        let w = whomp_matching(&d, 3, &KMeansOptions::default(), &BarycenterOptions::default(), true, &mut Rng::new(0)).unwrap();
        for g in w.partition.groups() {
            let mut v: Vec<f64> = g.iter().map(|&i| d.points()[[i, 0]]).collect();
            v.sort_by(f64::total_cmp);
            assert_eq!(v, vec![0.0, 1.0, 5.0]);
        }
    }
}
