//! Discrepancy of 1-Lipschitz statistics between subgroups and the sample.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::Rng as _;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::rng::Rng;
use crate::stats::select_rows;

/// For each subgroup, `max_a |mean h_a(X) − mean h_a(X_q)|` over probes
/// `h_a(x) = ‖x − a‖` with anchors drawn uniformly from the bounding box
/// of the data.
pub fn lipschitz_discrepancy(data: &Dataset, part: &Partition, probes: usize, rng: &mut Rng) -> Result<Vec<f64>> {
    if probes == 0 {
        return Err(Error::Invalid("need at least one probe".into()));
    }
    let x = data.points();
    let d = x.ncols();
    let lo: Vec<f64> = (0..d).map(|t| x.column(t).iter().cloned().fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..d).map(|t| x.column(t).iter().cloned().fold(f64::NEG_INFINITY, f64::max)).collect();
    let anchors = Array2::from_shape_fn((probes, d), |(_, t)| lo[t] + (hi[t] - lo[t]) * rng.random::<f64>());
    lipschitz_discrepancy_with_anchors(data, part, anchors.view())
}

pub fn lipschitz_discrepancy_with_anchors(data: &Dataset, part: &Partition, anchors: ArrayView2<f64>) -> Result<Vec<f64>> {
    part.validate(data.len(), false)?;
    if anchors.ncols() != data.dim() {
        return Err(Error::DimensionMismatch(anchors.ncols(), data.dim()));
    }
    let x = data.points().view();
    Ok(part
        .groups()
        .iter()
        .map(|g| lipschitz_gap(x, select_rows(x, g).view(), anchors))
        .collect())
}

/// `max_a |mean_x ‖x − a‖ − mean_y ‖y − a‖|`.
pub fn lipschitz_gap(x: ArrayView2<f64>, y: ArrayView2<f64>, anchors: ArrayView2<f64>) -> f64 {
    anchors
        .rows()
        .into_iter()
        .map(|a| (mean_dist(x, a) - mean_dist(y, a)).abs())
        .fold(0.0, f64::max)
}

fn mean_dist(x: ArrayView2<f64>, a: ArrayView1<f64>) -> f64 {
    let terms: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|r| crate::stats::sq_dist(r, a).sqrt())
        .collect();
    crate::stats::pairwise_sum(&terms) / x.nrows() as f64
}
