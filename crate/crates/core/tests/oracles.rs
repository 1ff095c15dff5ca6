//! Heuristics checked against exhaustive enumeration on small inputs.

use ndarray::{array, Array2};
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use whomp::barycenter::{barycenter_exact_small, barycenter_fixed_point, BarycenterOptions};
use whomp::clustering::{anticluster_exchange, balanced_kmeans, clustering_objective, within_group_sse, KMeansOptions};
use whomp::combinatorics::for_each_balanced_partition;
use whomp::oracle::{canonical_groups, exhaustive_balanced_kmeans};
use whomp::partitioners::{enumerate_qp, whomp_matching, whomp_random};
use whomp::stats::{select_rows, variance};
use whomp::transport::capacitated_assignment;
use whomp::{Dataset, Partition, Rng};

fn gaussian_cloud(n: usize, d: usize, rng: &mut Rng) -> Array2<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    Array2::from_shape_fn((n, d), |_| normal.sample(rng))
}

#[test]
fn kmeans_matches_exhaustive_search() {
    let mut rng = Rng::new(2024);
    let mut hits = 0;
    let trials = 100;
    for t in 0..trials {
        let k = [2, 4][t % 2];
        let x = gaussian_cloud(8, 2, &mut rng);
        let d = Dataset::new(x.clone(), None).unwrap();
        let opts = KMeansOptions { restarts: 20, ..Default::default() };
        let r = balanced_kmeans(&d, k, &opts, &mut rng).unwrap();
        let (best, _) = exhaustive_balanced_kmeans(x.view(), k).unwrap();
        assert!(r.objective >= best - 1e-9);
        if r.objective <= best + 1e-9 {
            hits += 1;
        }
        assert!((r.objective - clustering_objective(x.view(), &r.partition)).abs() < 1e-10);
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "{:?}", r.history);
        }
    }
    assert!(hits >= 95, "kmeans optimum rate {hits}/{trials}");
}

#[test]
fn separated_blobs_are_recovered() {
    let centers = [[0.0, 0.0], [50.0, 0.0]];
    let mut rng = Rng::new(3);
    let rows: Vec<Vec<f64>> = (0..8)
        .map(|i| {
            let c = centers[i / 4];
            vec![c[0] + rng.random::<f64>(), c[1] + rng.random::<f64>()]
        })
        .collect();
    let d = Dataset::from_rows(&rows).unwrap();
    let r = balanced_kmeans(&d, 2, &KMeansOptions::default(), &mut rng).unwrap();
    let (best, winners) = exhaustive_balanced_kmeans(d.points().view(), 2).unwrap();
    assert!((r.objective - best).abs() < 1e-9);
    assert_eq!(canonical_groups(&r.partition.groups()), canonical_groups(&winners[0]));
    assert_eq!(canonical_groups(&winners[0]), vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);
}

#[test]
fn capacitated_assignment_matches_enumeration() {
    let mut rng = Rng::new(8);
    for _ in 0..10 {
        let pts = gaussian_cloud(6, 2, &mut rng);
        let centers = gaussian_cloud(3, 2, &mut rng);
        let (_, cost) = capacitated_assignment(pts.view(), centers.view(), &[2, 2, 2]).unwrap();
        let mut best = f64::INFINITY;
        for_each_balanced_partition(6, 2, |groups| {
            // Every labelling of the three groups onto the three centers.
            for perm in whomp::combinatorics::Permutations::new(3) {
                let mut c = 0.0;
                for (g, members) in groups.iter().enumerate() {
                    for &i in members {
                        c += whomp::stats::sq_dist(pts.row(i), centers.row(perm[g]));
                    }
                }
                best = best.min(c);
            }
        });
        assert!((cost - best).abs() < 1e-10);
    }
}

/// Three triangles of radius 1 around centers at radius 3, 120° apart.
/// Point `3k + j` sits in triangle `k` at angle `90° + 120° j`.
fn triple_triangles() -> Dataset {
    let unit = |k: usize| {
        let a = (90.0 + 120.0 * k as f64).to_radians();
        [a.cos(), a.sin()]
    };
    let rows: Vec<Vec<f64>> = (0..9)
        .map(|i| {
            let (k, j) = (i / 3, i % 3);
            let (c, u) = (unit(k), unit(j));
            vec![3.0 * c[0] + u[0], 3.0 * c[1] + u[1]]
        })
        .collect();
    Dataset::from_rows(&rows).unwrap()
}

fn centroid_variance(d: &Dataset, p: &Partition) -> f64 {
    let x = d.points().view();
    let mu = whomp::stats::mean_point(x);
    p.groups()
        .iter()
        .map(|g| g.len() as f64 * whomp::stats::sq_dist(whomp::stats::mean_point(select_rows(x, g).view()).view(), mu.view()))
        .sum()
}

#[test]
fn anticlustering_mixes_scales_on_the_triangle_instance() {
    let d = triple_triangles();
    // The "one point per triangle, same orientation" grouping.
    let desired = Partition::from_groups(&[vec![0, 3, 6], vec![1, 4, 7], vec![2, 5, 8]], 9).unwrap();
    let mut best_centroid = f64::INFINITY;
    for_each_balanced_partition(9, 3, |g| {
        let p = Partition::from_groups(g, 9).unwrap();
        best_centroid = best_centroid.min(centroid_variance(&d, &p));
    });
    assert!(best_centroid < 1e-12);
    assert!(centroid_variance(&d, &desired) > 1.0);
    let mut reached_zero = 0;
    for seed in 0..20 {
        let p = anticluster_exchange(&d, 3, &mut Rng::new(seed), 100).unwrap();
        p.validate(9, true).unwrap();
        assert!(centroid_variance(&d, &p) < centroid_variance(&d, &desired));
        if centroid_variance(&d, &p) < 1e-9 {
            reached_zero += 1;
            // Zero centroid spread comes from groups mixing orientations.
            assert_ne!(canonical_groups(&p.groups()), canonical_groups(&desired.groups()));
        }
    }
    assert!(reached_zero > 0);
    // The centroid identity ties the two objectives together.
    let total: f64 = variance(d.points().view()) * 9.0;
    let p = anticluster_exchange(&d, 3, &mut Rng::new(0), 100).unwrap();
    assert!((within_group_sse(&d, &p) + centroid_variance(&d, &p) - total).abs() < 1e-9);
}

#[test]
fn matching_recovers_the_desired_triangle_partition() {
    let d = triple_triangles();
    let desired = canonical_groups(&[vec![0, 3, 6], vec![1, 4, 7], vec![2, 5, 8]]);
    let out = whomp_matching(&d, 3, &KMeansOptions::default(), &BarycenterOptions::default(), true, &mut Rng::new(1)).unwrap();
    assert_eq!(canonical_groups(&out.cluster_groups()), canonical_groups(&[vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]));
    assert_eq!(canonical_groups(&out.partition.groups()), desired);
    // Among Q(P) it minimizes the average subgroup variance.
    let mine: f64 = out.partition.groups().iter().map(|g| variance(select_rows(d.points().view(), g).view())).sum();
    for q in enumerate_qp(&out.cluster_groups(), 9, 1e6).unwrap() {
        let v: f64 = q.groups().iter().map(|g| variance(select_rows(d.points().view(), g).view())).sum();
        assert!(mine <= v + 1e-9);
    }
}

#[test]
fn whomp_subgroups_take_one_member_per_cluster() {
    let mut rng = Rng::new(77);
    for _ in 0..10 {
        let d = Dataset::new(gaussian_cloud(12, 2, &mut rng), None).unwrap();
        for m in [2, 3, 4] {
            let outs = [
                whomp_random(&d, m, &KMeansOptions::default(), true, &mut rng).unwrap(),
                whomp_matching(&d, m, &KMeansOptions::default(), &BarycenterOptions::default(), true, &mut rng).unwrap(),
            ];
            for out in outs {
                let owner = out.clusters.partition.assignment();
                for g in out.partition.groups() {
                    let mut o: Vec<usize> = g.iter().map(|&i| owner[i]).collect();
                    o.sort_unstable();
                    assert_eq!(o, (0..12 / m).collect::<Vec<_>>());
                }
            }
        }
    }
}

#[test]
fn barycenter_multistart_reaches_the_exact_optimum() {
    let mut rng = Rng::new(31);
    let mut hits = 0;
    for _ in 0..30 {
        let clouds: Vec<Array2<f64>> = (0..3).map(|_| gaussian_cloud(3, 2, &mut rng)).collect();
        let fp = barycenter_fixed_point(&clouds, &BarycenterOptions::default()).unwrap();
        let ex = barycenter_exact_small(&clouds, 1e6).unwrap();
        assert!(fp.cost >= ex.cost - 1e-9);
        if fp.cost <= ex.cost + 1e-9 {
            hits += 1;
        }
        // Variance identity at the exact barycenter.
        let all = ndarray::concatenate(ndarray::Axis(0), &clouds.iter().map(|c| c.view()).collect::<Vec<_>>()).unwrap();
        let lhs = variance(all.view()) - ex.cost / 3.0;
        assert!((lhs - variance(ex.support.view())).abs() < 1e-8);
        // Permuting the clouds leaves the optimum unchanged.
        let rev: Vec<Array2<f64>> = clouds.iter().rev().cloned().collect();
        assert!((barycenter_exact_small(&rev, 1e6).unwrap().cost - ex.cost).abs() < 1e-10);
        // Support points are the means of their matched points.
        for j in 0..3 {
            for t in 0..2 {
                let mean: f64 = (0..3).map(|p| clouds[p][[fp.matchings[p][j], t]]).sum::<f64>() / 3.0;
                assert!((fp.support[[j, t]] - mean).abs() < 1e-9);
            }
        }
    }
    assert!(hits >= 28, "multistart optimum rate {hits}/30");
}

#[test]
fn two_cloud_barycenter_agrees_with_the_oracle() {
    let a = array![[0.0, 1.0], [2.0, 2.0], [5.0, -1.0], [1.0, 1.0]];
    let b = array![[1.0, 0.0], [3.0, 3.0], [4.0, 0.0], [0.0, 2.0]];
    let fp = barycenter_fixed_point(&[a.clone(), b.clone()], &BarycenterOptions::default()).unwrap();
    let ex = barycenter_exact_small(&[a, b], 1e6).unwrap();
    assert!((fp.cost - ex.cost).abs() < 1e-12);
}
