//! Synthetic data: the Gaussian mixtures of the simulation studies and
//! stand-ins for the two external datasets.

use std::path::Path;

use anyhow::{ensure, Result};
use ndarray::Array2;
use rand::Rng as _;
use rand_distr::{Bernoulli, Binomial, Distribution, LogNormal, StandardNormal};
use whomp::{Dataset, Rng};

use crate::config::GmmConfig;

/// `per_component` points from every `N(mean, variance·I)`, labelled by component.
pub fn gmm_sample(cfg: &GmmConfig, variance: f64, rng: &mut Rng) -> Result<Dataset> {
    ensure!(!cfg.means.is_empty(), "mixture has no components");
    let d = cfg.means[0].len();
    let n = cfg.means.len() * cfg.per_component;
    let sd = variance.sqrt();
    let mut points = Array2::zeros((n, d));
    let mut labels = Vec::with_capacity(n);
    for (c, mean) in cfg.means.iter().enumerate() {
        ensure!(mean.len() == d, "mixture means differ in dimension");
        for i in 0..cfg.per_component {
            let row = c * cfg.per_component + i;
            for (j, &mu) in mean.iter().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                points[[row, j]] = mu + sd * z;
            }
            labels.push(c as i64);
        }
    }
    Ok(Dataset::new(points, Some(labels))?)
}

/// Survey-like table standing in for the NPI data: an inventory score out
/// of 40 driven by a latent trait, age, a binary item and completion time.
pub fn write_survey_csv(path: impl AsRef<Path>, rows: usize, rng: &mut Rng) -> Result<()> {
    let age = LogNormal::<f64>::new(3.2, 0.35)?;
    let elapsed = LogNormal::<f64>::new(5.5, 0.6)?;
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record(["score", "age", "gender", "elapse"])?;
    for _ in 0..rows {
        let trait_: f64 = rng.sample(StandardNormal);
        let p = 1.0 / (1.0 + (0.6 - 0.9 * trait_).exp());
        let score = Binomial::new(40, p)?.sample(rng) as f64;
        let a = (10.0 + age.sample(rng)).round().min(90.0);
        let g = Bernoulli::new(if trait_ > 0.0 { 0.55 } else { 0.4 })?.sample(rng) as u8 as f64;
        let e = elapsed.sample(rng).round();
        w.write_record([score, a, g, e].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Class proportions of the embedding stand-in; normalized entropy ≈ 0.98.
pub const EMBEDDING_CLASS_WEIGHTS: [f64; 10] = [0.17, 0.14, 0.12, 0.11, 0.1, 0.09, 0.08, 0.07, 0.06, 0.06];

/// Two-dimensional labelled clusters standing in for a t-SNE embedding of
/// ten digit classes: one blob per class plus a few points strayed into
/// other blobs, as embeddings of real images show.
pub fn write_embedding_csv(path: impl AsRef<Path>, rows: usize, rng: &mut Rng) -> Result<()> {
    let total: f64 = EMBEDDING_CLASS_WEIGHTS.iter().sum();
    let centers: Vec<(f64, f64)> = (0..10)
        .map(|k| {
            let radius = if k % 2 == 0 { 35.0 } else { 20.0 };
            let angle = k as f64 * std::f64::consts::TAU / 10.0;
            (radius * angle.cos(), radius * angle.sin())
        })
        .collect();
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record(["x", "y", "label"])?;
    for _ in 0..rows {
        let mut u = rng.random::<f64>() * total;
        let mut label = 9;
        for (k, &p) in EMBEDDING_CLASS_WEIGHTS.iter().enumerate() {
            if u < p {
                label = k;
                break;
            }
            u -= p;
        }
        let blob = if rng.random::<f64>() < 0.03 { rng.random_range(0..10) } else { label };
        let (cx, cy) = centers[blob];
        let x = cx + 3.0 * rng.sample::<f64, _>(StandardNormal);
        let y = cy + 3.0 * rng.sample::<f64, _>(StandardNormal);
        w.write_record([format!("{x:.4}"), format!("{y:.4}"), label.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use whomp::metrics::sample_entropy;

    #[test]
    fn gmm_sample_shape_and_labels() {
        let cfg = GmmConfig::default();
        let d = gmm_sample(&cfg, 3.0, &mut Rng::new(1)).unwrap();
        assert_eq!((d.len(), d.dim()), (60, 2));
        let labels = d.labels().unwrap();
        assert_eq!(labels.iter().filter(|&&l| l == 2).count(), 20);
        let first: f64 = (0..20).map(|i| d.points()[[i, 1]]).sum::<f64>() / 20.0;
        assert!((first - 10.0).abs() < 2.0);
    }

    #[test]
    fn zero_variance_collapses_components() {
        let cfg = GmmConfig {
            means: vec![vec![1.0, 1.0]],
            variance: Some(0.0),
            per_component: 5,
        };
        let d = gmm_sample(&cfg, 0.0, &mut Rng::new(2)).unwrap();
        assert!(d.points().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn stand_in_files_parse() {
        let dir = tempfile::tempdir().unwrap();
        let s = dir.path().join("s.csv");
        write_survey_csv(&s, 80, &mut Rng::new(3)).unwrap();
        let d = Dataset::from_csv(&s, true, None).unwrap();
        assert_eq!((d.len(), d.dim()), (80, 4));
        let e = dir.path().join("e.csv");
        write_embedding_csv(&e, 3000, &mut Rng::new(4)).unwrap();
        let d = Dataset::from_csv(&e, true, Some("label")).unwrap();
        assert_eq!(d.dim(), 2);
        let h = sample_entropy(d.labels().unwrap(), 10).unwrap();
        assert!((h - 0.98).abs() < 0.01, "{h}");
    }
}
