use serde::{Deserialize, Serialize};

use super::{Dataset, FEATURE_COLUMNS};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub feature: String,
    pub mean: f64,
    /// Sample standard deviation (divisor `n − 1`).
    pub std: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub max: f64,
}

/// Quantile of already sorted values, interpolating linearly between order
/// statistics at position `(n − 1)·q`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty slice");
    let pos = (n - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-feature summary over every record. Needs at least two records, since
/// the sample standard deviation of one value is undefined.
pub fn column_statistics(dataset: &Dataset) -> Result<Vec<FeatureStats>> {
    match dataset.records.len() {
        0 => return Err(Error::EmptyDataset),
        1 => return Err(Error::SingleRecord),
        _ => {}
    }
    let n = dataset.records.len() as f64;
    let stats = FEATURE_COLUMNS
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut values: Vec<f64> = dataset.records.iter().map(|r| r.features[j]).collect();
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            values.sort_by(f64::total_cmp);
            FeatureStats {
                feature: name.to_string(),
                mean,
                std: var.sqrt(),
                q25: quantile(&values, 0.25),
                q50: quantile(&values, 0.5),
                q75: quantile(&values, 0.75),
                max: *values.last().expect("non-empty"),
            }
        })
        .collect();
    Ok(stats)
}
