//! Experiment configuration, read from JSON.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use whomp::barycenter::BarycenterOptions;
use whomp::clustering::KMeansOptions;
use whomp::partitioners::PocockSimonConfig;
use whomp::{Method, PartitionerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    GmmW2,
    GmmClassify,
    GmmRegress,
    CsvW2,
    EmbeddingEntropy,
    SbmSpectra,
    PropertySuite,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::GmmW2 => "gmm_w2",
            ExperimentKind::GmmClassify => "gmm_classify",
            ExperimentKind::GmmRegress => "gmm_regress",
            ExperimentKind::CsvW2 => "csv_w2",
            ExperimentKind::EmbeddingEntropy => "embedding_entropy",
            ExperimentKind::SbmSpectra => "sbm_spectra",
            ExperimentKind::PropertySuite => "property_suite",
        }
    }

    /// Repetitions used by the published study of each kind.
    pub fn default_repetitions(self) -> usize {
        match self {
            ExperimentKind::CsvW2 => 500,
            ExperimentKind::EmbeddingEntropy => 50,
            _ => 100,
        }
    }
}

/// Isotropic Gaussian mixture; every component contributes the same count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmmConfig {
    pub means: Vec<Vec<f64>>,
    /// Per-coordinate variance. `None` picks 3 for `gmm_w2` and 4 for the
    /// downstream experiments.
    pub variance: Option<f64>,
    pub per_component: usize,
}

impl Default for GmmConfig {
    fn default() -> Self {
        Self {
            means: vec![vec![0.0, 10.0], vec![-10.0, -5.0], vec![10.0, -5.0]],
            variance: None,
            per_component: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SbmConfig {
    pub block_sizes: Vec<usize>,
    pub p_within: f64,
    pub p_between: f64,
    pub embedding_dims: usize,
}

impl Default for SbmConfig {
    fn default() -> Self {
        Self {
            block_sizes: vec![10, 20, 30],
            p_within: 0.6,
            p_between: 0.2,
            embedding_dims: 2,
        }
    }
}

impl SbmConfig {
    pub fn probabilities(&self) -> Vec<Vec<f64>> {
        let b = self.block_sizes.len();
        (0..b)
            .map(|i| (0..b).map(|j| if i == j { self.p_within } else { self.p_between }).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DownstreamConfig {
    /// Column predicted by the regression experiment; the rest are predictors.
    pub target_column: usize,
    pub iterations: usize,
    pub step: f64,
}

impl Default for DownstreamConfig {
    fn default() -> Self {
        Self {
            target_column: 1,
            iterations: 500,
            step: 0.1,
        }
    }
}

/// Serializable mirror of [`PartitionerConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionerSettings {
    pub kmeans_restarts: usize,
    pub kmeans_tol: f64,
    pub kmeans_max_iter: usize,
    pub barycenter_tol: f64,
    pub barycenter_max_iter: usize,
    pub barycenter_exact_budget: f64,
    pub pocock: PocockSimonConfig,
    pub anticluster_sweeps: usize,
    pub strict_divisibility: bool,
}

impl Default for PartitionerSettings {
    fn default() -> Self {
        let k = KMeansOptions::default();
        let b = BarycenterOptions::default();
        let p = PartitionerConfig::default();
        Self {
            kmeans_restarts: k.restarts,
            kmeans_tol: k.tol,
            kmeans_max_iter: k.max_iter,
            barycenter_tol: b.tol,
            barycenter_max_iter: b.max_iter,
            barycenter_exact_budget: b.exact_budget,
            pocock: p.pocock,
            anticluster_sweeps: p.anticluster_sweeps,
            strict_divisibility: p.strict_divisibility,
        }
    }
}

impl PartitionerSettings {
    pub fn to_config(&self) -> PartitionerConfig {
        PartitionerConfig {
            kmeans: KMeansOptions {
                restarts: self.kmeans_restarts,
                tol: self.kmeans_tol,
                max_iter: self.kmeans_max_iter,
            },
            barycenter: BarycenterOptions {
                tol: self.barycenter_tol,
                max_iter: self.barycenter_max_iter,
                exact_budget: self.barycenter_exact_budget,
                ..BarycenterOptions::default()
            },
            pocock: self.pocock.clone(),
            anticluster_sweeps: self.anticluster_sweeps,
            strict_divisibility: self.strict_divisibility,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Small,
    #[default]
    Default,
    Full,
}

impl std::str::FromStr for Scale {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small" => Ok(Scale::Small),
            "default" => Ok(Scale::Default),
            "full" => Ok(Scale::Full),
            _ => bail!("unknown scale {s:?} (expected small, default or full)"),
        }
    }
}

pub const PAPER_METHODS: [Method; 4] = [
    Method::Random,
    Method::CovariateAdaptive,
    Method::WhompRandom,
    Method::WhompMatching,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub methods: Vec<Method>,
    pub subgroup_counts: Vec<usize>,
    /// `None` uses the published count for the kind.
    pub repetitions: Option<usize>,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub has_header: bool,
    pub label_column: Option<String>,
    /// Rows drawn per repetition from `input`; defaults to 60 for `csv_w2`
    /// and 120 for `embedding_entropy`.
    pub sample_size: Option<usize>,
    pub gmm: GmmConfig,
    pub sbm: SbmConfig,
    pub downstream: DownstreamConfig,
    pub partitioner: PartitionerSettings,
    pub scale: Scale,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::default(),
            methods: PAPER_METHODS.to_vec(),
            subgroup_counts: vec![2, 4, 6],
            repetitions: None,
            seed: 0,
            output_dir: None,
            input: None,
            has_header: true,
            label_column: None,
            sample_size: None,
            gmm: GmmConfig::default(),
            sbm: SbmConfig::default(),
            downstream: DownstreamConfig::default(),
            partitioner: PartitionerSettings::default(),
            scale: Scale::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn for_kind(kind: ExperimentKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn repetitions(&self) -> usize {
        self.repetitions.unwrap_or_else(|| self.kind.default_repetitions())
    }

    pub fn gmm_variance(&self) -> f64 {
        self.gmm.variance.unwrap_or(match self.kind {
            ExperimentKind::GmmW2 => 3.0,
            _ => 4.0,
        })
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size.unwrap_or(match self.kind {
            ExperimentKind::EmbeddingEntropy => 120,
            _ => 60,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions() == 0 {
            bail!("repetitions must be at least 1");
        }
        if self.kind == ExperimentKind::PropertySuite {
            return Ok(());
        }
        if self.methods.is_empty() {
            bail!("methods must not be empty");
        }
        if self.subgroup_counts.is_empty() {
            bail!("subgroup_counts must not be empty");
        }
        if let Some(&m) = self.subgroup_counts.iter().find(|&&m| m < 2) {
            bail!("subgroup count {m} is below 2");
        }
        let max_m = *self.subgroup_counts.iter().max().unwrap();
        match self.kind {
            ExperimentKind::GmmW2 | ExperimentKind::GmmClassify | ExperimentKind::GmmRegress => {
                let g = &self.gmm;
                if g.means.is_empty() || g.per_component == 0 {
                    bail!("the mixture needs at least one component with one point");
                }
                let d = g.means[0].len();
                if d == 0 || g.means.iter().any(|m| m.len() != d) {
                    bail!("mixture means must share a nonzero dimension");
                }
                if !(self.gmm_variance() >= 0.0) {
                    bail!("mixture variance must be nonnegative");
                }
                if g.means.len() * g.per_component < max_m {
                    bail!("sample smaller than the largest subgroup count");
                }
                if self.kind == ExperimentKind::GmmRegress && (d < 2 || self.downstream.target_column >= d) {
                    bail!("regression needs at least two columns and a target column inside the data");
                }
                if self.kind != ExperimentKind::GmmW2 && self.downstream.iterations == 0 {
                    bail!("downstream iterations must be positive");
                }
            }
            ExperimentKind::CsvW2 | ExperimentKind::EmbeddingEntropy => {
                if self.input.is_none() {
                    bail!("{} needs an input CSV", self.kind.name());
                }
                if self.sample_size() < max_m {
                    bail!("sample_size smaller than the largest subgroup count");
                }
                if self.kind == ExperimentKind::EmbeddingEntropy && self.label_column.is_none() {
                    bail!("embedding_entropy needs label_column");
                }
            }
            ExperimentKind::SbmSpectra => {
                let s = &self.sbm;
                for p in [s.p_within, s.p_between] {
                    if !(0.0..=1.0).contains(&p) {
                        bail!("edge probability {p} outside [0, 1]");
                    }
                }
                let n: usize = s.block_sizes.iter().sum();
                if s.embedding_dims == 0 || s.embedding_dims >= n {
                    bail!("embedding dimension must lie in 1..n");
                }
                if n < max_m {
                    bail!("graph smaller than the largest subgroup count");
                }
            }
            ExperimentKind::PropertySuite => {}
        }
        Ok(())
    }
}
