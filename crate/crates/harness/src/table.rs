//! Per-repetition results and their per-(method, m) summaries.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use whomp::Method;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub method: Method,
    pub m: usize,
    pub repetition: usize,
    pub metrics: BTreeMap<String, f64>,
}

impl TrialRow {
    pub fn new(method: Method, m: usize, repetition: usize) -> Self {
        Self {
            method,
            m,
            repetition,
            metrics: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.metrics.insert(name.to_string(), value);
        self
    }
}

/// Mean and population standard deviation of one metric over repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: Method,
    pub m: usize,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTable {
    pub experiment: String,
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<AggregateRow>,
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl TrialTable {
    /// Sorts rows by `(method, m, repetition)` and summarizes them, so the
    /// result does not depend on the order in which trials finished.
    pub fn from_rows(experiment: &str, mut rows: Vec<TrialRow>) -> Self {
        rows.sort_by(|a, b| (a.method, a.m, a.repetition).cmp(&(b.method, b.m, b.repetition)));
        let mut buckets: BTreeMap<(Method, usize, String), Vec<f64>> = BTreeMap::new();
        for r in &rows {
            for (k, v) in &r.metrics {
                buckets.entry((r.method, r.m, k.clone())).or_default().push(*v);
            }
        }
        let aggregates = buckets
            .into_iter()
            .map(|((method, m, metric), values)| {
                let (mean, std) = mean_std(&values);
                AggregateRow {
                    method,
                    m,
                    metric,
                    mean,
                    std,
                    count: values.len(),
                }
            })
            .collect();
        Self {
            experiment: experiment.to_string(),
            rows,
            aggregates,
        }
    }

    pub fn aggregate(&self, method: Method, m: usize, metric: &str) -> Option<&AggregateRow> {
        self.aggregates
            .iter()
            .find(|a| a.method == method && a.m == m && a.metric == metric)
    }

    pub fn values(&self, method: Method, m: usize, metric: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.method == method && r.m == m)
            .filter_map(|r| r.metrics.get(metric).copied())
            .collect()
    }

    pub fn metric_names(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.rows.iter().flat_map(|r| r.metrics.keys()).collect();
        set.into_iter().cloned().collect()
    }

    pub fn write_rows_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let names = self.metric_names();
        let mut w = csv::Writer::from_path(path.as_ref())?;
        let mut header = vec!["method".to_string(), "m".into(), "repetition".into()];
        header.extend(names.iter().cloned());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.method.to_string(), r.m.to_string(), r.repetition.to_string()];
            for n in &names {
                rec.push(r.metrics.get(n).map(|v| format!("{v:?}")).unwrap_or_default());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref())?;
        w.write_record(["method", "m", "metric", "mean", "std", "count"])?;
        for a in &self.aggregates {
            w.write_record([
                a.method.to_string(),
                a.m.to_string(),
                a.metric.clone(),
                format!("{:?}", a.mean),
                format!("{:?}", a.std),
                a.count.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Paper-style layout: one line per method, `mean (std)` per subgroup count.
    pub fn render(&self, metric: &str) -> String {
        let methods: BTreeSet<Method> = self.rows.iter().map(|r| r.method).collect();
        let ms: BTreeSet<usize> = self.rows.iter().map(|r| r.m).collect();
        let mut out = format!("{metric}\n{:<20}", "method");
        for m in &ms {
            out.push_str(&format!("{:>20}", format!("m={m}")));
        }
        out.push('\n');
        for method in methods {
            out.push_str(&format!("{:<20}", method.name()));
            for &m in &ms {
                let cell = self
                    .aggregate(method, m, metric)
                    .map(|a| format!("{:.3} ({:.3})", a.mean, a.std))
                    .unwrap_or_else(|| "-".into());
                out.push_str(&format!("{cell:>20}"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TrialTable {
        let mut rows = Vec::new();
        for rep in (0..4).rev() {
            rows.push(TrialRow::new(Method::Random, 2, rep).with("w", rep as f64));
            rows.push(TrialRow::new(Method::WhompRandom, 2, rep).with("w", 1.0).with("z", 2.0));
        }
        TrialTable::from_rows("t", rows)
    }

    #[test]
    fn aggregates_are_recomputable_from_rows() {
        let t = sample();
        for a in &t.aggregates {
            let v = t.values(a.method, a.m, &a.metric);
            let (mean, std) = mean_std(&v);
            assert!((mean - a.mean).abs() <= 1e-12 && (std - a.std).abs() <= 1e-12);
        }
        let a = t.aggregate(Method::Random, 2, "w").unwrap();
        assert_eq!(a.mean, 1.5);
        assert!((a.std - 1.25f64.sqrt()).abs() < 1e-15);
        assert_eq!(t.rows[0].repetition, 0, "rows sorted");
    }

    #[test]
    fn csv_output_has_one_column_per_metric() {
        let dir = tempfile::tempdir().unwrap();
        let t = sample();
        t.write_rows_csv(dir.path().join("r.csv")).unwrap();
        t.write_summary_csv(dir.path().join("s.csv")).unwrap();
        let text = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
        assert!(text.starts_with("method,m,repetition,w,z\n"));
        assert_eq!(text.lines().count(), 9);
        assert!(t.render("w").contains("whomp_random"));
    }
}
