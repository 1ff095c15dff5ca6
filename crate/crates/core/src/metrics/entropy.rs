use crate::error::{Error, Result};
use crate::partition::Partition;

/// Per-subgroup Shannon entropy of the class frequencies divided by
/// `ln(num_classes)`, so values lie in `[0, 1]`. With one class the
/// entropy is 0.
pub fn normalized_entropy(labels: &[i64], part: &Partition, num_classes: usize) -> Result<Vec<f64>> {
    part.validate(labels.len(), false)?;
    if let Some(&label) = labels.iter().find(|&&l| l < 0 || l as usize >= num_classes) {
        return Err(Error::LabelOutOfRange {
            label,
            classes: num_classes,
        });
    }
    Ok(part
        .groups()
        .iter()
        .map(|g| entropy_of(g.iter().map(|&i| labels[i] as usize), g.len(), num_classes))
        .collect())
}

/// Normalized entropy of a whole label sequence.
pub fn sample_entropy(labels: &[i64], num_classes: usize) -> Result<f64> {
    let p = Partition::from_assignment(vec![0; labels.len()], 1)?;
    Ok(normalized_entropy(labels, &p, num_classes)?[0])
}

fn entropy_of(labels: impl Iterator<Item = usize>, n: usize, k: usize) -> f64 {
    if k <= 1 || n == 0 {
        return 0.0;
    }
    let mut counts = vec![0usize; k];
    labels.for_each(|l| counts[l] += 1);
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum();
    (h / (k as f64).ln()).clamp(0.0, 1.0)
}
