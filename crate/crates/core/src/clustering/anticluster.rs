//! Exchange heuristic for anticlustering: balanced groups with the largest
//! total within-group sum of squares.
//!
//! Since `SSE_within = Σ‖x‖² − Σ_g ‖S_g‖²/n_g` with `S_g` the group sums,
//! maximizing it is the same as minimizing `Σ_g ‖S_g‖²/n_g`, which makes
//! the change of a single swap cheap to evaluate.

use ndarray::{Array2, ArrayView1};

use crate::data::Dataset;
use crate::error::Result;
use crate::partition::{random_balanced_assignment, Partition};
use crate::rng::Rng;

/// Starts from a random balanced assignment; each sweep visits items in
/// index order and applies the best improving cross-group swap for that
/// item. Stops after a sweep without improvement or after `max_sweeps`.
pub fn anticluster_exchange(data: &Dataset, groups: usize, rng: &mut Rng, max_sweeps: usize) -> Result<Partition> {
    let start = random_balanced_assignment(data.len(), groups, rng)?;
    Ok(improve(data, start, max_sweeps))
}

/// Runs the exchange sweeps from a given starting partition.
pub fn improve(data: &Dataset, start: Partition, max_sweeps: usize) -> Partition {
    let x = data.points();
    let (n, d) = x.dim();
    let g = start.num_groups();
    let mut assign = start.assignment().to_vec();
    let counts: Vec<f64> = start.sizes().iter().map(|&s| s as f64).collect();
    let mut sums = Array2::<f64>::zeros((g, d));
    for (i, &a) in assign.iter().enumerate() {
        let mut s = sums.row_mut(a);
        s += &x.row(i);
    }
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let eps = 1e-12 * scale * scale;

    for _ in 0..max_sweeps {
        let mut improved = false;
        for i in 0..n {
            let gi = assign[i];
            let mut best = (-eps, usize::MAX);
            for j in 0..n {
                let gj = assign[j];
                if gj == gi {
                    continue;
                }
                let delta = swap_delta(x.row(i), x.row(j), sums.row(gi), sums.row(gj), counts[gi], counts[gj]);
                if delta < best.0 {
                    best = (delta, j);
                }
            }
            if best.1 != usize::MAX {
                let j = best.1;
                let gj = assign[j];
                for t in 0..d {
                    let diff = x[[j, t]] - x[[i, t]];
                    sums[[gi, t]] += diff;
                    sums[[gj, t]] -= diff;
                }
                assign.swap(i, j);
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    Partition::from_assignment(assign, g).expect("swaps keep group labels in range")
}

/// Change of `Σ_g ‖S_g‖²/n_g` when item `i` (group g) and item `j`
/// (group h) trade places.
fn swap_delta(
    xi: ArrayView1<f64>,
    xj: ArrayView1<f64>,
    sg: ArrayView1<f64>,
    sh: ArrayView1<f64>,
    ng: f64,
    nh: f64,
) -> f64 {
    let mut dot_g = 0.0;
    let mut dot_h = 0.0;
    let mut dd = 0.0;
    for t in 0..xi.len() {
        let delta = xj[t] - xi[t];
        dot_g += sg[t] * delta;
        dot_h += sh[t] * delta;
        dd += delta * delta;
    }
    (2.0 * dot_g + dd) / ng + (dd - 2.0 * dot_h) / nh
}

/// Total within-group sum of squares `Σ_g Σ_{x∈g} ‖x − mean_g‖²`.
pub fn within_group_sse(data: &Dataset, part: &Partition) -> f64 {
    part.groups()
        .iter()
        .map(|g| {
            let pts = crate::stats::select_rows(data.points().view(), g);
            crate::stats::variance(pts.view()) * g.len() as f64
        })
        .sum()
}
