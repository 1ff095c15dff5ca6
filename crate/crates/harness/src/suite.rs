//! Property suite: every structural claim behind the method, checked
//! against enumeration oracles or Monte-Carlo estimates.
//!
//! Each check is a plain function taking its instance counts explicitly,
//! so the acceptance test can run it at full size and `selftest` at a
//! smaller one.

use std::collections::BTreeSet;
use std::time::Instant;

use anyhow::{ensure, Result};
use ndarray::{Array1, Array2, Axis};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use whomp::barycenter::barycenter_exact_small;
use whomp::clustering::{balanced_kmeans, clustering_objective, KMeansOptions};
use whomp::combinatorics::{for_each_balanced_partition, Permutations};
use whomp::graphs::{laplacian_spectrum, sbm_generate, spectral_embedding, Graph};
use whomp::metrics::{
    ate_randomization_test, ate_variance_bound_check, homogeneity_report, normalized_entropy, QpSampler,
};
use whomp::oracle::{canonical_groups, exhaustive_balanced_kmeans, exhaustive_whomp, whomp_objective, ORACLE_BUDGET};
use whomp::partitioners::{deal_from_clusters, enumerate_qp, whomp_matching, whomp_random};
use whomp::stats::{mean_point, select_rows, sq_dist, variance};
use whomp::transport::{transport_lp, w2_1d_sq, w2_exact, w2_sq_uniform, DiscreteMeasure};
use whomp::{partition_subgroups, Dataset, Method, Partition, PartitionerConfig, Rng, SubgroupRequest};

use crate::audit;
use crate::config::{GmmConfig, Scale};
use crate::generators::gmm_sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub scale: Scale,
    pub seed: u64,
    /// Negative control: report every W2 distance with its sign flipped.
    pub inject_fault: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            scale: Scale::Default,
            seed: 2024,
            inject_fault: false,
        }
    }
}

/// Verdict of one check with a human-readable measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Self { passed, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub options: SuiteOptions,
    pub results: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn passed_names(&self) -> BTreeSet<String> {
        self.results.iter().filter(|r| r.passed).map(|r| r.name.clone()).collect()
    }
}

const EXACT: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= EXACT * (1.0 + a.abs().max(b.abs()))
}

pub fn gaussian_points(n: usize, d: usize, rng: &mut Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, d), || rng.sample(StandardNormal))
}

fn dataset(points: Array2<f64>) -> Dataset {
    Dataset::new(points, None).expect("finite points")
}

fn random_measure(max_len: usize, d: usize, uniform: bool, rng: &mut Rng) -> DiscreteMeasure {
    let n = rng.random_range(1..=max_len);
    let support = gaussian_points(n, d, rng);
    if uniform {
        return DiscreteMeasure::uniform(support).unwrap();
    }
    let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    DiscreteMeasure::new(support, raw.iter().map(|w| w / total).collect()).unwrap()
}

fn distance(opts: &SuiteOptions, a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    let d = w2_exact(a, b)?.0;
    Ok(if opts.inject_fault { -d } else { d })
}

fn sigma_rate(hits: usize, total: usize) -> String {
    format!("{hits}/{total} ({:.1}%)", 100.0 * hits as f64 / total.max(1) as f64)
}

/// Metric axioms on random measures, brute-force permutation oracle for
/// uniform measures, and the 1-D closed form against the LP.
pub fn transport_correctness(opts: &SuiteOptions, instances: usize) -> Result<Outcome> {
    let mut rng = Rng::new(opts.seed).derive(11);
    let mut failures = Vec::new();
    for i in 0..instances {
        let uniform = i % 2 == 0;
        let ms: Vec<DiscreteMeasure> = (0..3).map(|_| random_measure(5, 2, uniform, &mut rng)).collect();
        let d = |x: usize, y: usize| distance(opts, &ms[x], &ms[y]);
        let (ab, ba, bc, ac, aa) = (d(0, 1)?, d(1, 0)?, d(1, 2)?, d(0, 2)?, d(0, 0)?);
        if !(ab >= 0.0 && bc >= 0.0 && ac >= 0.0) {
            failures.push(format!("negative distance on instance {i}"));
        } else if aa.abs() > EXACT {
            failures.push(format!("d(a,a) = {aa:e} on instance {i}"));
        } else if (ab - ba).abs() > EXACT {
            failures.push(format!("asymmetry {:e} on instance {i}", (ab - ba).abs()));
        } else if ac > ab + bc + EXACT {
            failures.push(format!("triangle violated by {:e} on instance {i}", ac - ab - bc));
        }
    }
    let axioms = failures.len();

    let mut worst_perm: f64 = 0.0;
    for i in 0..instances {
        let n = 1 + i % 6;
        let a = gaussian_points(n, 2, &mut rng);
        let b = gaussian_points(n, 2, &mut rng);
        let brute = Permutations::new(n)
            .map(|p| (0..n).map(|j| sq_dist(a.row(j), b.row(p[j]))).sum::<f64>() / n as f64)
            .fold(f64::INFINITY, f64::min);
        let fast = w2_sq_uniform(a.view(), b.view())?;
        worst_perm = worst_perm.max((fast - brute).abs());
    }

    let mut worst_1d: f64 = 0.0;
    for _ in 0..instances {
        let a = random_measure(8, 1, false, &mut rng);
        let b = random_measure(8, 1, false, &mut rng);
        let closed = w2_1d_sq(
            a.support().column(0).as_slice().unwrap(),
            a.weights(),
            b.support().column(0).as_slice().unwrap(),
            b.weights(),
        )?;
        let lp = transport_lp(&a, &b)?.cost;
        worst_1d = worst_1d.max((closed - lp).abs());
    }
    let passed = axioms == 0 && worst_perm <= EXACT && worst_1d <= 1e-10;
    let mut detail = format!(
        "metric axioms {}/{instances} ok; permutation oracle max |Δ| {worst_perm:.1e}; 1-D vs LP max |Δ| {worst_1d:.1e}",
        instances - axioms
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first failure: {f}"));
    }
    Ok(Outcome::new(passed, detail))
}

/// Balanced k-means against exhaustive search at `N = 8`, `K ∈ {2, 4}`.
pub fn kmeans_oracle(opts: &SuiteOptions, instances: usize) -> Result<Outcome> {
    let rng = Rng::new(opts.seed).derive(12);
    let kopts = KMeansOptions {
        restarts: 20,
        ..KMeansOptions::default()
    };
    let mut hits = 0;
    let mut worst_recompute: f64 = 0.0;
    for i in 0..instances {
        let mut r = rng.derive(i as u64);
        let k = if i % 2 == 0 { 2 } else { 4 };
        let d = 1 + i % 2;
        let data = dataset(gaussian_points(8, d, &mut r));
        let res = balanced_kmeans(&data, k, &kopts, &mut r)?;
        let best = exhaustive_balanced_kmeans(data.points().view(), k)?.0;
        hits += close(res.objective, best) as usize;
        let again = clustering_objective(data.points().view(), &res.partition);
        worst_recompute = worst_recompute.max((again - res.objective).abs());
    }
    let passed = hits * 100 >= 95 * instances && worst_recompute <= 1e-10;
    Ok(Outcome::new(
        passed,
        format!(
            "optimal on {}; objective recompute max |Δ| {worst_recompute:.1e}",
            sigma_rate(hits, instances)
        ),
    ))
}

/// WHOMP Random and Matching against the exhaustive minimum of
/// `Σ_q W2²(X_q, X)` at `N = 8`, `m = 2`.
pub fn whomp_oracle_optimality(opts: &SuiteOptions, instances: usize) -> Result<Outcome> {
    let rng = Rng::new(opts.seed).derive(13);
    let cfg = PartitionerConfig::default();
    let (mut hit_r, mut hit_m) = (0, 0);
    for i in 0..instances {
        let mut r = rng.derive(i as u64);
        let data = dataset(gaussian_points(8, 2, &mut r));
        let x = data.points().view();
        let best = exhaustive_whomp(x, 2)?.0;
        let wr = whomp_random(&data, 2, &cfg.kmeans, true, &mut r.derive(1))?.partition;
        let wm = whomp_matching(&data, 2, &cfg.kmeans, &cfg.barycenter, true, &mut r.derive(2))?.partition;
        audit::record(&data, &wr);
        audit::record(&data, &wm);
        hit_r += close(whomp_objective(x, &wr.groups()), best) as usize;
        hit_m += close(whomp_objective(x, &wm.groups()), best) as usize;
    }
    let passed = hit_r * 100 >= 95 * instances && hit_m * 100 >= 95 * instances;
    Ok(Outcome::new(
        passed,
        format!(
            "WHOMP random optimal on {}, WHOMP matching on {}",
            sigma_rate(hit_r, instances),
            sigma_rate(hit_m, instances)
        ),
    ))
}

fn clouds_of(points: &Array2<f64>, groups: &[Vec<usize>]) -> Vec<Array2<f64>> {
    groups.iter().map(|g| select_rows(points.view(), g)).collect()
}

fn centroids(points: &Array2<f64>, groups: &[Vec<usize>]) -> Array2<f64> {
    let d = points.ncols();
    let mut c = Array2::zeros((groups.len(), d));
    for (k, g) in groups.iter().enumerate() {
        c.row_mut(k).assign(&mean_point(select_rows(points.view(), g).view()));
    }
    c
}

/// For `Q ∈ Q(P*)` with `P*` the optimal balanced clustering, the exact
/// barycenter of the subgroups coincides with the cluster centroids.
pub fn barycenter_centroid_identity(opts: &SuiteOptions, instances: usize, draws: usize) -> Result<Outcome> {
    const SHAPES: [(usize, usize); 5] = [(3, 3), (3, 4), (4, 3), (4, 2), (2, 4)];
    let rng = Rng::new(opts.seed).derive(14);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for i in 0..instances {
        let (k, c) = SHAPES[i % SHAPES.len()];
        let n = k * c;
        let mut r = rng.derive(i as u64);
        let points = gaussian_points(n, 2, &mut r);
        let (_, winners) = exhaustive_balanced_kmeans(points.view(), k)?;
        let clusters = &winners[0];
        let cent = centroids(&points, clusters);
        let data = dataset(points.clone());
        for _ in 0..draws {
            let q = deal_from_clusters(clusters, c, n, &mut r)?;
            audit::record(&data, &q);
            let bary = barycenter_exact_small(&clouds_of(&points, &q.groups()), ORACLE_BUDGET)?;
            let w = w2_sq_uniform(bary.support.view(), cent.view())?.max(0.0).sqrt();
            worst = worst.max(w);
            checked += 1;
        }
    }
    Ok(Outcome::new(
        worst <= 1e-8,
        format!("{checked} subgroup partitions; max W2(barycenter, centroids) {worst:.1e}"),
    ))
}

fn mean_stats(points: &Array2<f64>, groups: &[Vec<usize>]) -> (f64, f64) {
    let means = centroids(points, groups);
    let vars: Vec<f64> = groups
        .iter()
        .map(|g| variance(select_rows(points.view(), g).view()))
        .collect();
    (variance(means.view()), vars.iter().sum::<f64>() / vars.len() as f64)
}

/// Over the whole of `Q(P)` at `K = 3`, `c = 3`, WHOMP Matching has the
/// largest variance of subgroup means and the smallest mean subgroup variance.
pub fn tradeoff_extremality(opts: &SuiteOptions, instances: usize) -> Result<Outcome> {
    let rng = Rng::new(opts.seed).derive(15);
    let cfg = PartitionerConfig::default();
    let mut hits = 0;
    let mut worst_gap: f64 = 0.0;
    for i in 0..instances {
        let mut r = rng.derive(i as u64);
        let points = gaussian_points(9, 2, &mut r);
        let data = dataset(points.clone());
        let out = whomp_matching(&data, 3, &cfg.kmeans, &cfg.barycenter, true, &mut r)?;
        audit::record(&data, &out.partition);
        let (vm, mv) = mean_stats(&points, &out.partition.groups());
        let (mut max_vm, mut min_mv) = (f64::NEG_INFINITY, f64::INFINITY);
        for q in enumerate_qp(&out.cluster_groups(), 9, ORACLE_BUDGET)? {
            let (a, b) = mean_stats(&points, &q.groups());
            max_vm = max_vm.max(a);
            min_mv = min_mv.min(b);
        }
        let gap = (max_vm - vm).max(mv - min_mv);
        worst_gap = worst_gap.max(gap);
        hits += (gap <= EXACT) as usize;
    }
    Ok(Outcome::new(
        hits == instances,
        format!(
            "extremal on {} instances; worst gap {worst_gap:.1e}",
            sigma_rate(hits, instances)
        ),
    ))
}

/// Law of total variance on the output of every method.
pub fn total_variance_identity(opts: &SuiteOptions, instances: usize) -> Result<Outcome> {
    let rng = Rng::new(opts.seed).derive(16);
    let cfg = PartitionerConfig::default();
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let mut r = rng.derive(i as u64);
        let n = 6 + i % 9;
        let data = dataset(gaussian_points(n, 1 + i % 3, &mut r));
        for method in Method::ALL {
            for m in [2, 3] {
                let req = SubgroupRequest {
                    num_subgroups: m,
                    seed: r.random(),
                    method,
                };
                let part = partition_subgroups(&data, &req, &cfg)?;
                let rep = homogeneity_report(&data, &part)?;
                worst = worst.max(rep.total_variance_residual()).max(audit::record(&data, &part));
            }
        }
    }
    Ok(Outcome::new(worst <= EXACT, format!("max residual {worst:.1e}")))
}

/// `(1/m)·Σ_q W2²(barycenter, X_q) = var(X) − var(barycenter)` for the
/// exact barycenter of equal-size subgroups.
pub fn variance_reduction_identity(opts: &SuiteOptions, instances: usize) -> Result<Outcome> {
    let rng = Rng::new(opts.seed).derive(17);
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let mut r = rng.derive(i as u64);
        let (k, m) = [(3, 2), (4, 2), (3, 3), (2, 4)][i % 4];
        let points = gaussian_points(k * m, 2, &mut r);
        let q = whomp::random_balanced_assignment(k * m, m, &mut r)?;
        let b = barycenter_exact_small(&clouds_of(&points, &q.groups()), ORACLE_BUDGET)?;
        let lhs = b.cost / m as f64;
        let rhs = variance(points.view()) - variance(b.support.view());
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(Outcome::new(worst <= 1e-7, format!("max |Δ| {worst:.1e}")))
}

fn linear_outcomes(points: &Array2<f64>, a: &Array1<f64>, c0: f64, c1: f64) -> (Vec<f64>, Vec<f64>) {
    let base = points.dot(a);
    (base.mapv(|v| v + c0).to_vec(), base.mapv(|v| v + c1).to_vec())
}

/// The difference in means over `Q(P)` draws is unbiased for the average
/// effect, and exact-duplicate clusters give a null distribution at 0.
pub fn unbiasedness_and_degenerate_null(opts: &SuiteOptions, draws: usize) -> Result<Outcome> {
    let rng = Rng::new(opts.seed).derive(18);
    let data = gmm_sample(&GmmConfig::default(), 3.0, &mut rng.derive(0))?;
    let points = data.points().clone();
    let n = data.len();
    let clusters = balanced_kmeans(&data, n / 2, &KMeansOptions::default(), &mut rng.derive(1))?
        .partition
        .groups();
    let a = Array1::from(vec![0.7, -0.3]);
    let (y0, y1) = linear_outcomes(&points, &a, 2.0, 0.5);
    let check = ate_variance_bound_check(points.view(), &y0, &y1, 0.0, &clusters, draws, 1, &mut rng.derive(2))?;
    let z = (check.mean_tau_hat - check.tau).abs() / check.standard_error.max(1e-300);
    let unbiased = z <= 3.0;

    // Every distinct point appears twice, so the optimal clusters are the pairs.
    let distinct = gaussian_points(30, 2, &mut rng.derive(3));
    let doubled = ndarray::concatenate(Axis(0), &[distinct.view(), distinct.view()])?;
    let dup = dataset(doubled.clone());
    let km = balanced_kmeans(&dup, 30, &KMeansOptions::default(), &mut rng.derive(4))?;
    ensure!(km.objective.abs() <= 1e-12, "duplicate pairs not recovered");
    let clusters = km.partition.groups();
    let sampler = QpSampler {
        clusters: clusters.clone(),
        groups: 2,
        n: 60,
    };
    let observed = deal_from_clusters(&clusters, 2, 60, &mut rng.derive(5))?;
    audit::record(&dup, &observed);
    let (y, _) = linear_outcomes(&doubled, &a, 0.0, 0.0);
    let test = ate_randomization_test(&y, &observed, &sampler, draws, &mut rng.derive(6))?;
    let spread = test.null_distribution.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok(Outcome::new(
        unbiased && spread <= 1e-12,
        format!(
            "mean τ̂ {:.5} vs τ {:.5} ({z:.2} SE); duplicate-cluster null max |draw| {spread:.1e}",
            check.mean_tau_hat, check.tau
        ),
    ))
}

/// Monte-Carlo `E(τ̂ − τ)²` against `L²·m/(m−1)·Σ_q W2²(X_q, X)` with 5% slack.
pub fn variance_bound(opts: &SuiteOptions, instances: usize, draws: usize) -> Result<Outcome> {
    let rng = Rng::new(opts.seed).derive(19);
    let mut held = 0;
    let mut worst_ratio: f64 = 0.0;
    for i in 0..instances {
        let r = rng.derive(i as u64);
        let n = [12, 20, 40][i % 3];
        let d = 1 + i % 3;
        let points = gaussian_points(n, d, &mut r.derive(0));
        let data = dataset(points.clone());
        let clusters = balanced_kmeans(&data, n / 2, &KMeansOptions::default(), &mut r.derive(1))?
            .partition
            .groups();
        let a = gaussian_points(1, d, &mut r.derive(2)).row(0).to_owned();
        let lip = a.dot(&a).sqrt();
        let (y0, y1) = linear_outcomes(&points, &a, 1.0, -1.0);
        let check = ate_variance_bound_check(points.view(), &y0, &y1, lip, &clusters, draws, 50, &mut r.derive(3))?;
        held += check.holds(0.05) as usize;
        worst_ratio = worst_ratio.max(check.empirical / check.bound);
    }
    Ok(Outcome::new(
        held == instances,
        format!(
            "bound holds on {}; largest empirical/bound ratio {worst_ratio:.3}",
            sigma_rate(held, instances)
        ),
    ))
}

/// `W2²(X, S) ≥ (1/K)·min_P Σ_p var(X_p)` for with-replacement subsamples `S` of size `K`.
pub fn subsample_lower_bound(opts: &SuiteOptions, samples: usize) -> Result<Outcome> {
    const DATASETS: usize = 10;
    let rng = Rng::new(opts.seed).derive(20);
    let (n, k) = (12, 4);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for t in 0..DATASETS {
        let mut r = rng.derive(t as u64);
        let points = gaussian_points(n, 2, &mut r);
        let bound = exhaustive_balanced_kmeans(points.view(), k)?.0 / k as f64;
        let per = samples / DATASETS + usize::from(t < samples % DATASETS);
        for _ in 0..per {
            let idx: Vec<usize> = (0..k).map(|_| r.random_range(0..n)).collect();
            let s = select_rows(points.view(), &idx);
            let w = w2_sq_uniform(points.view(), s.view())?;
            violations += (w < bound - EXACT) as usize;
            tightest = tightest.min(w - bound);
        }
    }
    Ok(Outcome::new(
        violations == 0,
        format!("{violations} violations in {samples} subsamples; smallest margin {tightest:.3e}"),
    ))
}

fn arg_set(values: &[(Vec<Vec<usize>>, f64)], maximize: bool) -> BTreeSet<Vec<Vec<usize>>> {
    let best = values
        .iter()
        .map(|v| v.1)
        .fold(if maximize { f64::NEG_INFINITY } else { f64::INFINITY }, |a, b| {
            if maximize {
                a.max(b)
            } else {
                a.min(b)
            }
        });
    values
        .iter()
        .filter(|v| close(v.1, best))
        .map(|v| canonical_groups(&v.0))
        .collect()
}

fn total_group_variance(points: &Array2<f64>, groups: &[Vec<usize>]) -> f64 {
    groups
        .iter()
        .map(|g| variance(select_rows(points.view(), g).view()))
        .sum()
}

/// Mean of `Σ_g var(X_g)` over every partition in `Q(groups)`.
fn expected_over_qp(points: &Array2<f64>, groups: &[Vec<usize>]) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for q in enumerate_qp(groups, points.nrows(), ORACLE_BUDGET)? {
        total += total_group_variance(points, &q.groups());
        count += 1;
    }
    Ok(total / count as f64)
}

/// Exhaustive checks of the centroid characterization of anti-clustering
/// and of the two random-selection dualities at `N = 8`.
pub fn dualities(opts: &SuiteOptions, instances: usize) -> Result<Outcome> {
    let rng = Rng::new(opts.seed).derive(21);
    let n = 8;
    let mut worst_identity: f64 = 0.0;
    let mut argset_failures = 0;
    let mut stated_clustering_form = 0;
    for i in 0..instances {
        let points = gaussian_points(n, 2, &mut rng.derive(i as u64));
        let mu = mean_point(points.view());
        let sst: f64 = points.rows().into_iter().map(|x| sq_dist(x, mu.view())).sum();
        for (k, c) in [(4, 2), (2, 4)] {
            // Centroid characterization over balanced partitions into k groups.
            let mut within = Vec::new();
            let mut between = Vec::new();
            // Anti-clustering duality: P has k clusters of size c.
            let mut p_obj = Vec::new();
            let mut p_exp = Vec::new();
            // Clustering duality: Q has c subgroups of size k.
            let mut q_obj = Vec::new();
            let mut q_exp = Vec::new();
            let mut err = None;
            for_each_balanced_partition(n, c, |groups| {
                let groups = groups.to_vec();
                let ssw: f64 = groups
                    .iter()
                    .map(|g| g.len() as f64 * variance(select_rows(points.view(), g).view()))
                    .sum();
                let ssb: f64 = groups
                    .iter()
                    .map(|g| g.len() as f64 * sq_dist(mean_point(select_rows(points.view(), g).view()).view(), mu.view()))
                    .sum();
                worst_identity = worst_identity.max((ssw + ssb - sst).abs());
                within.push((groups.clone(), ssw));
                between.push((groups.clone(), ssb));
                let obj = total_group_variance(&points, &groups);
                match expected_over_qp(&points, &groups) {
                    Ok(e) => {
                        // Closed forms of the expectations, in both roles.
                        let var_x = sst / n as f64;
                        let anti = c as f64 * var_x - c as f64 / (k * k) as f64 * obj;
                        worst_identity = worst_identity.max((e - anti).abs());
                        p_obj.push((groups.clone(), obj));
                        p_exp.push((groups.clone(), e));
                        // The same groups read as Q: c = group size plays K, k plays c.
                        q_obj.push((groups.clone(), obj));
                        q_exp.push((groups, e));
                    }
                    Err(e) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            if arg_set(&within, true) != arg_set(&between, false) {
                argset_failures += 1;
            }
            if arg_set(&p_obj, false) != arg_set(&p_exp, true) {
                argset_failures += 1;
            }
            // Maximizing the total subgroup variance minimizes the expected
            // cluster variance over P(Q).
            if arg_set(&q_obj, true) != arg_set(&q_exp, false) {
                argset_failures += 1;
            }
            if arg_set(&q_obj, true) == arg_set(&q_exp, true) {
                stated_clustering_form += 1;
            }
        }
    }
    Ok(Outcome::new(
        argset_failures == 0 && worst_identity <= EXACT,
        format!(
            "{} optimizer-set comparisons, {argset_failures} mismatches; identities max |Δ| {worst_identity:.1e}; \
             max-max form of the clustering duality held on {stated_clustering_form}/{}",
            instances * 6,
            instances * 2
        ),
    ))
}

/// When the optimal balanced clustering `P` is unique, the subgroup
/// partitions whose barycenter variance equals `var(centroids of P)` are
/// exactly `Q(P)`. Instances with tied optima are skipped and counted.
pub fn rerandomization_equivalence(opts: &SuiteOptions, wanted: usize, max_attempts: usize) -> Result<Outcome> {
    let rng = Rng::new(opts.seed).derive(22);
    let (n, m) = (8, 2);
    let k = n / m;
    let (mut used, mut skipped, mut agree) = (0, 0, 0);
    let mut attempt = 0;
    while used < wanted && attempt < max_attempts {
        let mut r = rng.derive(attempt as u64);
        attempt += 1;
        let points = gaussian_points(n, 2, &mut r);
        let (_, winners) = exhaustive_balanced_kmeans(points.view(), k)?;
        if winners.len() != 1 {
            skipped += 1;
            continue;
        }
        used += 1;
        let p = &winners[0];
        let target = variance(centroids(&points, p).view());
        let qp: BTreeSet<Vec<Vec<usize>>> = enumerate_qp(p, n, ORACLE_BUDGET)?
            .map(|q| canonical_groups(&q.groups()))
            .collect();
        let mut accepted = BTreeSet::new();
        let mut err = None;
        for_each_balanced_partition(n, k, |groups| {
            match barycenter_exact_small(&clouds_of(&points, groups), ORACLE_BUDGET) {
                Ok(b) => {
                    if close(variance(b.support.view()), target) {
                        accepted.insert(canonical_groups(groups));
                    }
                }
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        agree += (accepted == qp) as usize;
        let data = dataset(points);
        let draw = deal_from_clusters(p, m, n, &mut r)?;
        audit::record(&data, &draw);
    }
    Ok(Outcome::new(
        used == wanted && agree == used,
        format!("acceptance set equals Q(P) on {agree}/{used} unique-optimum instances; {skipped} tied instances skipped"),
    ))
}

/// Laplacian spectra, embeddings and SBM densities.
pub fn graph_checks(opts: &SuiteOptions, instances: usize) -> Result<Outcome> {
    let rng = Rng::new(opts.seed).derive(23);
    let mut problems = Vec::new();
    for i in 0..instances {
        let mut r = rng.derive(i as u64);
        let g = sbm_generate(&[4, 5, 6], &[vec![0.7, 0.2, 0.1], vec![0.2, 0.6, 0.2], vec![0.1, 0.2, 0.8]], &mut r)?;
        let spec = laplacian_spectrum(&g);
        let trace: f64 = (0..g.n()).map(|u| g.degree(u) as f64).sum();
        if (spec.iter().sum::<f64>() - trace).abs() > 1e-8 || spec.iter().any(|&v| v < -1e-8) {
            problems.push(format!("spectrum of instance {i}"));
        }
        let perm: Vec<usize> = (0..g.n()).rev().collect();
        let relabeled = Graph::from_edges(g.n(), &g.edges().iter().map(|&(u, v)| (perm[u], perm[v])).collect::<Vec<_>>())?;
        let spec2 = laplacian_spectrum(&relabeled);
        if spec.iter().zip(&spec2).any(|(a, b)| (a - b).abs() > 1e-8) {
            problems.push(format!("relabeling changed the spectrum of instance {i}"));
        }
        let emb = spectral_embedding(&g, 2)?;
        let l = g.laplacian();
        let norm = l.iter().map(|v| v * v).sum::<f64>().sqrt();
        for col in emb.columns() {
            let lv = l.dot(&col);
            let lambda = col.dot(&lv);
            let res = (&lv - &(&col * lambda)).mapv(|v| v * v).sum().sqrt();
            if res > 1e-8 * norm.max(1.0) {
                problems.push(format!("embedding residual {res:e} on instance {i}"));
            }
        }
    }
    let k5 = laplacian_spectrum(&Graph::complete(5));
    if (k5[0].abs() > 1e-10) || k5[1..].iter().any(|v| (v - 5.0).abs() > 1e-10) {
        problems.push("complete graph spectrum".into());
    }
    Ok(Outcome::new(
        problems.is_empty(),
        if problems.is_empty() {
            format!("{instances} random graphs: trace, sign, relabeling and eigen-residual checks passed")
        } else {
            problems.join("; ")
        },
    ))
}

/// Entropy bounds and invariance to class relabeling.
pub fn entropy_checks(opts: &SuiteOptions, instances: usize) -> Result<Outcome> {
    let rng = Rng::new(opts.seed).derive(24);
    let mut bad = 0;
    for i in 0..instances {
        let mut r = rng.derive(i as u64);
        let n = 6 + i % 20;
        let classes = 2 + i % 6;
        let labels: Vec<i64> = (0..n).map(|_| r.random_range(0..classes as i64)).collect();
        let part: Partition = whomp::random_balanced_assignment(n, 2 + i % 3, &mut r)?;
        let h = normalized_entropy(&labels, &part, classes)?;
        let shifted: Vec<i64> = labels.iter().map(|l| (l + 1) % classes as i64).collect();
        let h2 = normalized_entropy(&shifted, &part, classes)?;
        let ok = h.iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v))
            && h.iter().zip(&h2).all(|(a, b)| (a - b).abs() <= 1e-12);
        bad += (!ok) as usize;
    }
    Ok(Outcome::new(bad == 0, format!("{bad} failures in {instances} labelings")))
}

struct Sizes {
    transport: usize,
    kmeans: usize,
    oracle: usize,
    identity: usize,
    identity_draws: usize,
    tradeoff: usize,
    small: usize,
    draws: usize,
    bound_instances: usize,
    subsamples: usize,
    dualities: usize,
    rerandomization: usize,
}

fn sizes(scale: Scale) -> Sizes {
    match scale {
        Scale::Small => Sizes {
            transport: 40,
            kmeans: 20,
            oracle: 20,
            identity: 5,
            identity_draws: 5,
            tradeoff: 5,
            small: 10,
            draws: 2000,
            bound_instances: 3,
            subsamples: 100,
            dualities: 1,
            rerandomization: 3,
        },
        Scale::Default => Sizes {
            transport: 100,
            kmeans: 40,
            oracle: 40,
            identity: 10,
            identity_draws: 20,
            tradeoff: 10,
            small: 20,
            draws: 5000,
            bound_instances: 6,
            subsamples: 250,
            dualities: 2,
            rerandomization: 8,
        },
        Scale::Full => Sizes {
            transport: 200,
            kmeans: 100,
            oracle: 100,
            identity: 20,
            identity_draws: 50,
            tradeoff: 20,
            small: 40,
            draws: 10_000,
            bound_instances: 20,
            subsamples: 500,
            dualities: 5,
            rerandomization: 20,
        },
    }
}

type Check = Box<dyn Fn(&SuiteOptions) -> Result<Outcome>>;

/// Runs every check; an error inside a check counts as a failure.
pub fn run_property_suite(opts: &SuiteOptions) -> SuiteReport {
    let s = sizes(opts.scale);
    let checks: Vec<(&str, Check)> = vec![
        ("transport_correctness", Box::new(move |o| transport_correctness(o, s.transport))),
        ("kmeans_oracle", Box::new(move |o| kmeans_oracle(o, s.kmeans))),
        ("whomp_oracle_optimality", Box::new(move |o| whomp_oracle_optimality(o, s.oracle))),
        (
            "barycenter_centroid_identity",
            Box::new(move |o| barycenter_centroid_identity(o, s.identity, s.identity_draws)),
        ),
        ("tradeoff_extremality", Box::new(move |o| tradeoff_extremality(o, s.tradeoff))),
        ("total_variance_identity", Box::new(move |o| total_variance_identity(o, s.small))),
        ("variance_reduction_identity", Box::new(move |o| variance_reduction_identity(o, s.small))),
        ("unbiasedness_and_degenerate_null", Box::new(move |o| unbiasedness_and_degenerate_null(o, s.draws))),
        ("variance_bound", Box::new(move |o| variance_bound(o, s.bound_instances, s.draws))),
        ("subsample_lower_bound", Box::new(move |o| subsample_lower_bound(o, s.subsamples))),
        ("dualities", Box::new(move |o| dualities(o, s.dualities))),
        (
            "rerandomization_equivalence",
            Box::new(move |o| rerandomization_equivalence(o, s.rerandomization, 20 * s.rerandomization)),
        ),
        ("graph_checks", Box::new(move |o| graph_checks(o, s.small))),
        ("entropy_checks", Box::new(move |o| entropy_checks(o, s.small))),
    ];
    let results = checks
        .into_iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let outcome = check(opts).unwrap_or_else(|e| Outcome::new(false, format!("error: {e:#}")));
            PropertyResult {
                name: name.to_string(),
                passed: outcome.passed,
                detail: outcome.detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect();
    SuiteReport {
        options: *opts,
        results,
    }
}
