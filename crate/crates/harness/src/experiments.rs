//! Repeated-trial runners for the simulation and data studies.

use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use ndarray::{Array1, Axis};
use rand::seq::index::sample as sample_indices;
use rand::seq::SliceRandom;
use rand::RngCore;
use rayon::prelude::*;
use whomp::graphs::{sbm_generate, spectral_embedding, spectrum_report};
use whomp::metrics::{homogeneity_report, normalized_entropy, sample_entropy};
use whomp::{partition_subgroups, Dataset, Method, Partition, PartitionerConfig, Rng, SubgroupRequest};

use crate::audit;
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::generators::gmm_sample;
use crate::models::{accuracy, mse, LinearFit, Logistic};
use crate::table::{TrialRow, TrialTable};

/// Environment variable holding the worker count; unset or 0 means one per core.
pub const THREADS_ENV: &str = "WHOMP_THREADS";

pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .with_context(|| format!("{THREADS_ENV}={v:?} is not a count"))?,
        Err(_) => 0,
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

fn method_key(method: Method) -> u64 {
    Method::ALL.iter().position(|&m| m == method).unwrap() as u64
}

/// Seed of the partitioner for `(repetition, method, m)`.
pub fn partition_seed(rep_rng: &Rng, method: Method, m: usize) -> u64 {
    rep_rng.derive(1 + 1000 * method_key(method) + m as u64).next_u64()
}

/// Runs `trial` for every repetition on the pool. Repetition `r` gets
/// `Rng::new(seed).derive(r)`, so results do not depend on scheduling.
fn repeat<F>(cfg: &ExperimentConfig, trial: F) -> Result<Vec<TrialRow>>
where
    F: Fn(usize, &Rng) -> Result<Vec<TrialRow>> + Sync + Send,
{
    let root = Rng::new(cfg.seed);
    let pool = thread_pool()?;
    let per_rep: Vec<Vec<TrialRow>> = pool.install(|| {
        (0..cfg.repetitions())
            .into_par_iter()
            .map(|rep| trial(rep, &root.derive(rep as u64)))
            .collect::<Result<_>>()
    })?;
    Ok(per_rep.into_iter().flatten().collect())
}

fn partition(data: &Dataset, method: Method, m: usize, seed: u64, pcfg: &PartitionerConfig) -> Result<Partition> {
    let req = SubgroupRequest {
        num_subgroups: m,
        seed,
        method,
    };
    let part = partition_subgroups(data, &req, pcfg).with_context(|| format!("{method} with m={m}"))?;
    audit::record(data, &part);
    Ok(part)
}

fn w2_row(data: &Dataset, part: &Partition, method: Method, m: usize, rep: usize) -> Result<TrialRow> {
    let r = homogeneity_report(data, part)?;
    let residual = r.total_variance_residual();
    audit::record_residual(residual);
    Ok(TrialRow::new(method, m, rep)
        .with("mean_w2", r.mean_w2)
        .with("sum_w2_sq", r.sum_w2_sq)
        .with("var_of_means", r.var_of_means)
        .with("mean_of_vars", r.mean_of_vars)
        .with("var_of_vars", r.var_of_vars)
        .with("total_var", r.total_var)
        .with("variance_residual", residual))
}

/// W2 diagnostics on fresh mixture samples.
pub fn run_gmm_w2(cfg: &ExperimentConfig) -> Result<TrialTable> {
    cfg.validate()?;
    let pcfg = cfg.partitioner.to_config();
    let rows = repeat(cfg, |rep, rng| {
        let data = gmm_sample(&cfg.gmm, cfg.gmm_variance(), &mut rng.derive(0))?;
        let mut rows = Vec::new();
        for &method in &cfg.methods {
            for &m in &cfg.subgroup_counts {
                let part = partition(&data, method, m, partition_seed(rng, method, m), &pcfg)?;
                rows.push(w2_row(&data, &part, method, m, rep)?);
            }
        }
        Ok(rows)
    })?;
    Ok(TrialTable::from_rows(cfg.kind.name(), rows))
}

/// Train on one random subgroup, test on another: logistic accuracy for
/// `gmm_classify`, least-squares error for `gmm_regress`.
pub fn run_gmm_downstream(cfg: &ExperimentConfig) -> Result<TrialTable> {
    cfg.validate()?;
    ensure!(
        matches!(cfg.kind, ExperimentKind::GmmClassify | ExperimentKind::GmmRegress),
        "not a downstream experiment: {}",
        cfg.kind.name()
    );
    let pcfg = cfg.partitioner.to_config();
    let classes = cfg.gmm.means.len();
    let ds = &cfg.downstream;
    let rows = repeat(cfg, |rep, rng| {
        let data = gmm_sample(&cfg.gmm, cfg.gmm_variance(), &mut rng.derive(0))?;
        let x = data.points();
        let labels: Vec<usize> = data.labels().unwrap().iter().map(|&l| l as usize).collect();
        let target = ds.target_column;
        let predictors: Vec<usize> = (0..data.dim()).filter(|&j| j != target).collect();
        let target_var = x.column(target).var(0.0);
        let mut rows = Vec::new();
        for &method in &cfg.methods {
            for &m in &cfg.subgroup_counts {
                let part = partition(&data, method, m, partition_seed(rng, method, m), &pcfg)?;
                let groups = part.groups();
                let mut pick: Vec<usize> = (0..m).collect();
                pick.shuffle(&mut rng.derive(500_000 + 1000 * method_key(method) + m as u64));
                let (train, test) = (&groups[pick[0]], &groups[pick[1]]);
                let row = TrialRow::new(method, m, rep);
                let row = if cfg.kind == ExperimentKind::GmmClassify {
                    let model = Logistic::fit(
                        x.select(Axis(0), train).view(),
                        &train.iter().map(|&i| labels[i]).collect::<Vec<_>>(),
                        classes,
                        ds.iterations,
                        ds.step,
                    );
                    let truth: Vec<usize> = test.iter().map(|&i| labels[i]).collect();
                    row.with("accuracy", accuracy(&model.predict(x.select(Axis(0), test).view()), &truth))
                } else {
                    let xs = x.select(Axis(1), &predictors);
                    let y = x.column(target);
                    let fit = LinearFit::fit(
                        xs.select(Axis(0), train).view(),
                        Array1::from_iter(train.iter().map(|&i| y[i])).view(),
                    );
                    let truth = Array1::from_iter(test.iter().map(|&i| y[i]));
                    let err = mse(fit.predict(xs.select(Axis(0), test).view()).view(), truth.view());
                    let relative = if target_var > 0.0 { err / target_var } else { 0.0 };
                    row.with("mse", err)
                        .with("relative_mse", relative)
                        .with("ridge_fallback", fit.ridge as u8 as f64)
                };
                rows.push(row);
            }
        }
        Ok(rows)
    })?;
    Ok(TrialTable::from_rows(cfg.kind.name(), rows))
}

fn load_input(cfg: &ExperimentConfig) -> Result<Dataset> {
    let path = cfg.input.as_ref().ok_or_else(|| anyhow!("no input file configured"))?;
    Dataset::from_csv(path, cfg.has_header, cfg.label_column.as_deref())
        .with_context(|| format!("loading {}", path.display()))
}

fn subsample(data: &Dataset, size: usize, rng: &mut Rng) -> Result<Dataset> {
    let mut idx = sample_indices(rng, data.len(), size).into_vec();
    idx.sort_unstable();
    Ok(data.subset(&idx)?)
}

/// W2 diagnostics on row subsamples of a numeric CSV.
pub fn run_csv_w2(cfg: &ExperimentConfig) -> Result<TrialTable> {
    cfg.validate()?;
    let full = load_input(cfg)?;
    let size = cfg.sample_size();
    if full.len() < size {
        bail!("input has {} rows, fewer than the sample size {size}", full.len());
    }
    let pcfg = cfg.partitioner.to_config();
    let rows = repeat(cfg, |rep, rng| {
        let data = subsample(&full, size, &mut rng.derive(0))?;
        let mut rows = Vec::new();
        for &method in &cfg.methods {
            for &m in &cfg.subgroup_counts {
                let part = partition(&data, method, m, partition_seed(rng, method, m), &pcfg)?;
                rows.push(w2_row(&data, &part, method, m, rep)?);
            }
        }
        Ok(rows)
    })?;
    Ok(TrialTable::from_rows(cfg.kind.name(), rows))
}

/// Class-label entropy of subgroups of a labelled embedding.
pub fn run_embedding_entropy(cfg: &ExperimentConfig) -> Result<TrialTable> {
    cfg.validate()?;
    let full = load_input(cfg)?;
    let labels = full.labels().ok_or_else(|| anyhow!("embedding has no label column"))?;
    ensure!(labels.iter().all(|&l| l >= 0), "labels must be nonnegative class indices");
    let classes = (*labels.iter().max().unwrap() + 1) as usize;
    let size = cfg.sample_size().min(full.len());
    let pcfg = cfg.partitioner.to_config();
    let rows = repeat(cfg, |rep, rng| {
        let data = if size == full.len() {
            full.clone()
        } else {
            subsample(&full, size, &mut rng.derive(0))?
        };
        let labels = data.labels().unwrap();
        let base = if classes > 1 { sample_entropy(labels, classes)? } else { 0.0 };
        let mut rows = Vec::new();
        for &method in &cfg.methods {
            for &m in &cfg.subgroup_counts {
                let part = partition(&data, method, m, partition_seed(rng, method, m), &pcfg)?;
                let h = if classes > 1 {
                    normalized_entropy(labels, &part, classes)?
                } else {
                    vec![0.0; m]
                };
                let mean = h.iter().sum::<f64>() / h.len() as f64;
                let min = h.iter().copied().fold(f64::INFINITY, f64::min);
                rows.push(
                    TrialRow::new(method, m, rep)
                        .with("mean_entropy", mean)
                        .with("min_entropy", min)
                        .with("sample_entropy", base),
                );
            }
        }
        Ok(rows)
    })?;
    Ok(TrialTable::from_rows(cfg.kind.name(), rows))
}

/// Laplacian-spectrum W2 between an SBM graph and its subgraphs, with the
/// partition computed on the spectral embedding of the nodes.
pub fn run_sbm_spectra(cfg: &ExperimentConfig) -> Result<TrialTable> {
    cfg.validate()?;
    let pcfg = cfg.partitioner.to_config();
    let probs = cfg.sbm.probabilities();
    let rows = repeat(cfg, |rep, rng| {
        let g = sbm_generate(&cfg.sbm.block_sizes, &probs, &mut rng.derive(0))?;
        let emb = spectral_embedding(&g, cfg.sbm.embedding_dims)?;
        let data = Dataset::new(emb, None)?;
        let mut rows = Vec::new();
        for &method in &cfg.methods {
            for &m in &cfg.subgroup_counts {
                let part = partition(&data, method, m, partition_seed(rng, method, m), &pcfg)?;
                let r = spectrum_report(&g, &part)?;
                rows.push(
                    TrialRow::new(method, m, rep)
                        .with("mean_w2", r.mean_w2)
                        .with("std_w2", r.std_w2),
                );
            }
        }
        Ok(rows)
    })?;
    Ok(TrialTable::from_rows(cfg.kind.name(), rows))
}

pub fn run_table(cfg: &ExperimentConfig) -> Result<TrialTable> {
    match cfg.kind {
        ExperimentKind::GmmW2 => run_gmm_w2(cfg),
        ExperimentKind::GmmClassify | ExperimentKind::GmmRegress => run_gmm_downstream(cfg),
        ExperimentKind::CsvW2 => run_csv_w2(cfg),
        ExperimentKind::EmbeddingEntropy => run_embedding_entropy(cfg),
        ExperimentKind::SbmSpectra => run_sbm_spectra(cfg),
        ExperimentKind::PropertySuite => bail!("property_suite produces a report, not a table"),
    }
}

/// Headline metric of each kind, used for console rendering.
pub fn headline_metric(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::GmmClassify => "accuracy",
        ExperimentKind::GmmRegress => "mse",
        ExperimentKind::EmbeddingEntropy => "mean_entropy",
        _ => "mean_w2",
    }
}

pub fn write_table(table: &TrialTable, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    table.write_rows_csv(dir.join(format!("{}_rows.csv", table.experiment)))?;
    table.write_summary_csv(dir.join(format!("{}_summary.csv", table.experiment)))?;
    std::fs::write(
        dir.join(format!("{}.json", table.experiment)),
        serde_json::to_string_pretty(table)?,
    )?;
    Ok(())
}
