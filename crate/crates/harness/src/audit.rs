//! Process-wide record of the worst law-of-total-variance residual seen on
//! any partition the harness produced.

use std::sync::Mutex;

use whomp::stats::{mean_point, select_rows, sq_dist, variance};
use whomp::{Dataset, Partition};

static WORST: Mutex<(f64, usize)> = Mutex::new((0.0, 0));

/// `|var(X) − Σ_q w_q‖mean_q − mean‖² − Σ_q w_q var(X_q)|` with `w_q = |q|/N`.
pub fn total_variance_residual(data: &Dataset, part: &Partition) -> f64 {
    let x = data.points().view();
    let n = data.len() as f64;
    let mu = mean_point(x);
    let mut between = 0.0;
    let mut within = 0.0;
    for g in part.groups() {
        if g.is_empty() {
            continue;
        }
        let xs = select_rows(x, &g);
        let w = g.len() as f64 / n;
        between += w * sq_dist(mean_point(xs.view()).view(), mu.view());
        within += w * variance(xs.view());
    }
    (variance(x) - between - within).abs()
}

pub fn record_residual(residual: f64) {
    let mut w = WORST.lock().unwrap_or_else(|e| e.into_inner());
    if residual.is_nan() || residual > w.0 {
        w.0 = if residual.is_nan() { f64::INFINITY } else { residual };
    }
    w.1 += 1;
}

/// Checks `part` and records its residual.
pub fn record(data: &Dataset, part: &Partition) -> f64 {
    let r = total_variance_residual(data, part);
    record_residual(r);
    r
}

/// `(worst residual, partitions seen)`.
pub fn snapshot() -> (f64, usize) {
    *WORST.lock().unwrap_or_else(|e| e.into_inner())
}
