use ndarray::Array2;
use proptest::prelude::*;
use whomp::combinatorics::Permutations;
use whomp::graphs::{laplacian_spectrum, sbm_generate, Graph};
use whomp::metrics::{homogeneity_report, normalized_entropy};
use whomp::partitioners::{pocock_simon, PocockSimonConfig};
use whomp::transport::{cost_matrix, match_uniform, transport_lp, w2_1d_sq, w2_exact, DiscreteMeasure};
use whomp::{random_balanced_assignment, Dataset, Partition, Rng};

fn cloud(max_n: usize, d: usize) -> impl Strategy<Value = Array2<f64>> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(-10.0f64..10.0, n * d).prop_map(move |v| Array2::from_shape_vec((n, d), v).unwrap())
    })
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(|w| {
        let s: f64 = w.iter().sum();
        let mut w: Vec<f64> = w.iter().map(|x| x / s).collect();
        // Absorb rounding so the weights sum to one exactly enough.
        let rest: f64 = w[1..].iter().sum();
        w[0] = 1.0 - rest;
        w
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_balanced_always_validates(n in 1usize..=50, g_seed in any::<u64>(), seed in any::<u64>()) {
        let g = 1 + (g_seed as usize % n);
        let p = random_balanced_assignment(n, g, &mut Rng::new(seed)).unwrap();
        prop_assert!(p.validate(n, true).is_ok());
        prop_assert_eq!(p.clone(), random_balanced_assignment(n, g, &mut Rng::new(seed)).unwrap());
    }

    #[test]
    fn csv_round_trip_is_bit_exact(x in cloud(12, 3), labels in prop::collection::vec(-5i64..5, 12)) {
        let n = x.nrows();
        let d = Dataset::new(x, Some(labels[..n].to_vec())).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        d.write_csv(&path).unwrap();
        let back = Dataset::from_csv(&path, true, Some("label")).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn metric_axioms(a in cloud(8, 2), b in cloud(8, 2), c in cloud(8, 2)) {
        let (ma, mb, mc) = (
            DiscreteMeasure::uniform(a).unwrap(),
            DiscreteMeasure::uniform(b).unwrap(),
            DiscreteMeasure::uniform(c).unwrap(),
        );
        let ab = w2_exact(&ma, &mb).unwrap().0;
        let ba = w2_exact(&mb, &ma).unwrap().0;
        let bc = w2_exact(&mb, &mc).unwrap().0;
        let ac = w2_exact(&ma, &mc).unwrap().0;
        prop_assert!((ab - ba).abs() <= 1e-10);
        prop_assert!(w2_exact(&ma, &ma).unwrap().0 <= 1e-10);
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn plans_reproduce_marginals((na, nb) in (1usize..7, 1usize..7), seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        use rand::Rng as _;
        let a = Array2::from_shape_fn((na, 2), |_| rng.random::<f64>() * 4.0);
        let b = Array2::from_shape_fn((nb, 2), |_| rng.random::<f64>() * 4.0);
        let raw_a: Vec<f64> = (0..na).map(|_| 0.1 + rng.random::<f64>()).collect();
        let raw_b: Vec<f64> = (0..nb).map(|_| 0.1 + rng.random::<f64>()).collect();
        let norm = |w: Vec<f64>| { let s: f64 = w.iter().sum(); let mut w: Vec<f64> = w.iter().map(|x| x / s).collect(); let r: f64 = w[1..].iter().sum(); w[0] = 1.0 - r; w };
        let ma = DiscreteMeasure::new(a, norm(raw_a)).unwrap();
        let mb = DiscreteMeasure::new(b, norm(raw_b)).unwrap();
        let (dist, plan) = w2_exact(&ma, &mb).unwrap();
        for (x, y) in plan.row_marginals(na).iter().zip(ma.weights()) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
        for (x, y) in plan.col_marginals(nb).iter().zip(mb.weights()) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
        prop_assert!(plan.entries.iter().all(|e| e.2 >= 0.0));
        let c = cost_matrix(ma.support().view(), mb.support().view());
        let recomputed: f64 = plan.entries.iter().map(|&(i, j, f)| f * c[[i, j]]).sum();
        prop_assert!((recomputed - dist * dist).abs() <= 1e-10);
    }

    #[test]
    fn uniform_cost_equals_matching_cost(a in cloud(6, 3), seed in any::<u64>()) {
        let n = a.nrows();
        let mut rng = Rng::new(seed);
        use rand::Rng as _;
        let b = Array2::from_shape_fn((n, 3), |_| rng.random::<f64>() * 5.0 - 2.5);
        let m = match_uniform(a.view(), b.view()).unwrap();
        let (d, _) = w2_exact(&DiscreteMeasure::uniform(a.clone()).unwrap(), &DiscreteMeasure::uniform(b.clone()).unwrap()).unwrap();
        prop_assert!((d * d - m.cost / n as f64).abs() <= 1e-10);
        let c = cost_matrix(a.view(), b.view());
        let brute = Permutations::new(n)
            .map(|p| p.iter().enumerate().map(|(i, &j)| c[[i, j]]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        prop_assert!((m.cost - brute).abs() <= 1e-9);
        let mut seen = m.perm.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn translation_covariance(a in cloud(5, 2), b in cloud(5, 2), v in prop::array::uniform2(-3.0f64..3.0)) {
        let shift = |x: &Array2<f64>| { let mut y = x.clone(); for mut r in y.rows_mut() { r[0] += v[0]; r[1] += v[1]; } y };
        let d = |x: &Array2<f64>, y: &Array2<f64>| {
            w2_exact(&DiscreteMeasure::uniform(x.clone()).unwrap(), &DiscreteMeasure::uniform(y.clone()).unwrap()).unwrap().0
        };
        prop_assert!((d(&a, &b) - d(&shift(&a), &shift(&b))).abs() <= 1e-10);
        // Shifting one side: W2²(a + v, b) = W2²(a − μa, b − μb) + ‖μa + v − μb‖².
        let center = |x: &Array2<f64>| { let mu = x.mean_axis(ndarray::Axis(0)).unwrap(); (x - &mu, mu) };
        let (ca, mua) = center(&a);
        let (cb, mub) = center(&b);
        let gap: f64 = (0..2).map(|t| (mua[t] + v[t] - mub[t]).powi(2)).sum();
        let lhs = d(&shift(&a), &b).powi(2);
        prop_assert!((lhs - (d(&ca, &cb).powi(2) + gap)).abs() <= 1e-9);
    }

    #[test]
    fn one_dimensional_closed_form_matches_lp(na in 1usize..8, nb in 1usize..8, seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        use rand::Rng as _;
        let a: Vec<f64> = (0..na).map(|_| rng.random::<f64>() * 10.0).collect();
        let b: Vec<f64> = (0..nb).map(|_| rng.random::<f64>() * 10.0).collect();
        let ua = vec![1.0 / na as f64; na];
        let ub = vec![1.0 / nb as f64; nb];
        let closed = w2_1d_sq(&a, &ua, &b, &ub).unwrap();
        let lp = transport_lp(
            &DiscreteMeasure::uniform(Array2::from_shape_vec((na, 1), a).unwrap()).unwrap(),
            &DiscreteMeasure::uniform(Array2::from_shape_vec((nb, 1), b).unwrap()).unwrap(),
        ).unwrap();
        prop_assert!((closed - lp.cost).abs() <= 1e-10);
    }

    #[test]
    fn weighted_one_dimensional_matches_lp(wa in weights(5), wb in weights(4), seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        use rand::Rng as _;
        let a: Vec<f64> = (0..5).map(|_| rng.random::<f64>() * 6.0).collect();
        let b: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 6.0).collect();
        let closed = w2_1d_sq(&a, &wa, &b, &wb).unwrap();
        let lp = transport_lp(
            &DiscreteMeasure::new(Array2::from_shape_vec((5, 1), a).unwrap(), wa).unwrap(),
            &DiscreteMeasure::new(Array2::from_shape_vec((4, 1), b).unwrap(), wb).unwrap(),
        ).unwrap();
        prop_assert!((closed - lp.cost).abs() <= 1e-10);
    }

    #[test]
    fn law_of_total_variance(x in cloud(20, 2), g in 1usize..5, seed in any::<u64>()) {
        let n = x.nrows();
        let g = g.min(n);
        let d = Dataset::new(x, None).unwrap();
        let p = random_balanced_assignment(n, g, &mut Rng::new(seed)).unwrap();
        let r = homogeneity_report(&d, &p).unwrap();
        prop_assert!(r.total_variance_residual().abs() <= 1e-9);
        prop_assert!(r.sum_w2_sq >= 0.0);
    }

    #[test]
    fn entropy_bounded_and_relabel_invariant(labels in prop::collection::vec(0i64..6, 4..40), seed in any::<u64>()) {
        let n = labels.len();
        let p = random_balanced_assignment(n, 2, &mut Rng::new(seed)).unwrap();
        let e = normalized_entropy(&labels, &p, 6).unwrap();
        prop_assert!(e.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let relabeled: Vec<i64> = labels.iter().map(|&l| (l + 2) % 6).collect();
        let f = normalized_entropy(&relabeled, &p, 6).unwrap();
        for (a, b) in e.iter().zip(&f) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn pocock_simon_balanced(x in cloud(30, 2), m in 2usize..5, seed in any::<u64>()) {
        let n = x.nrows();
        prop_assume!(m <= n);
        let d = Dataset::new(x, None).unwrap();
        let p = pocock_simon(&d, m, &PocockSimonConfig::default(), &mut Rng::new(seed)).unwrap();
        prop_assert!(p.validate(n, true).is_ok());
    }

    #[test]
    fn laplacian_trace_and_relabeling(seed in any::<u64>(), n in 2usize..12) {
        let probs = vec![vec![0.4]];
        let g = sbm_generate(&[n], &probs, &mut Rng::new(seed)).unwrap();
        let s = laplacian_spectrum(&g);
        prop_assert_eq!(s.len(), n);
        let trace: usize = (0..n).map(|u| g.degree(u)).sum();
        prop_assert!((s.iter().sum::<f64>() - trace as f64).abs() <= 1e-8);
        prop_assert!(s.iter().all(|&v| v >= -1e-8));
        prop_assert!(s[0].abs() <= 1e-8);
        let perm: Vec<usize> = (0..n).rev().collect();
        let relabeled = Graph::from_edges(n, &g.edges().iter().map(|&(u, v)| (perm[u], perm[v])).collect::<Vec<_>>()).unwrap();
        let t = laplacian_spectrum(&relabeled);
        for (a, b) in s.iter().zip(&t) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }
}

#[test]
fn partition_validate_reports_first_violation() {
    let p = Partition::from_assignment(vec![0, 0, 0, 2], 3).unwrap();
    assert!(matches!(p.validate(4, true), Err(whomp::Error::EmptyGroup(1))));
}
