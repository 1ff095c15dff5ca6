//! JSON manifest written next to every experiment's output.

use std::path::Path;

use anyhow::Result;
use serde::Serialize;

use crate::config::ExperimentConfig;

/// Interpretation choices that affect reported numbers.
pub const INTERPRETATIONS: &[&str] = &[
    "variance is the mean squared deviation from the mean (population form)",
    "var_of_means and mean_of_vars weight subgroup q by |q|/N; var_of_vars is unweighted",
    "var_of_vars is the variance across subgroups of the scalar within-subgroup variance",
    "graph Laplacian is unnormalized, L = D - A",
    "spectral embedding skips the null space of L and fixes signs by the largest-magnitude entry",
    "subgraph and graph spectra are compared as uniform measures of different sizes",
    "balanced k-means stops on W2^2 between optimally matched center sets",
    "logistic regression: softmax, full-batch gradient descent on training-standardized features, no penalty",
    "regression predicts the target column from the other columns by least squares with intercept; relative_mse divides by the sample variance of the target",
    "two subgroups for the downstream studies are drawn without replacement from the m subgroups",
    "aggregate std is the population standard deviation over repetitions",
    "when m does not divide N, WHOMP uses ceil(N/m) clusters and sizes differ by at most one",
    "p-values use the add-one convention",
];

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a ExperimentConfig,
    pub repetitions: usize,
    pub repetition_seeds: &'static str,
    pub threads_env: &'static str,
    pub interpretations: &'static [&'static str],
}

impl<'a> RunManifest<'a> {
    pub fn new(config: &'a ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config,
            repetitions: config.repetitions(),
            repetition_seeds: "repetition r uses Rng::new(seed).derive(r); the partitioner for (method, m) \
                               draws its seed from derive(1 + 1000*method_index + m) of that generator",
            threads_env: crate::experiments::THREADS_ENV,
            interpretations: INTERPRETATIONS,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
