use std::path::PathBuf;

/// Errors reported by the partitioning toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("points must have at least one column")]
    ZeroDimension,
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("failed to parse row {row}, column {column} ({value:?}): {reason}")]
    Parse {
        row: usize,
        column: usize,
        value: String,
        reason: String,
    },
    #[error("ragged CSV: row {row} has {actual} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        actual: usize,
    },
    #[error("label column {0:?} not found in header")]
    MissingColumn(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("group index {index} out of range for {groups} groups")]
    GroupOutOfRange { index: usize, groups: usize },
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("partition is unbalanced: group sizes range from {min} to {max}")]
    Imbalanced { min: usize, max: usize },
    #[error("invalid group count {groups} for {n} items")]
    InvalidGroupCount { groups: usize, n: usize },
    #[error("{n} items cannot be split evenly into {groups} groups")]
    NotDivisible { n: usize, groups: usize },
    #[error("weights must be nonnegative and sum to 1 (sum = {sum})")]
    WeightNormalization { sum: f64 },
    #[error("capacities sum to {sum}, expected {expected}")]
    CapacityMismatch { sum: usize, expected: usize },
    #[error("clusters must all have {expected} points, cluster {index} has {actual}")]
    UnequalClusters {
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error("enumeration needs {needed} candidates, budget is {budget}")]
    BudgetExceeded { needed: f64, budget: f64 },
    #[error("invalid probability {0}")]
    InvalidProbability(f64),
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: i64, classes: usize },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
