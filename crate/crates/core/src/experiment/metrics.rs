use serde::{Deserialize, Serialize};

use crate::dataset::Score;
use crate::error::{Error, Result};

/// Classification threshold; an output exactly at the threshold is non-severe.
pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub mse: f64,
    /// Always `mse.sqrt()`.
    pub rmse: f64,
    pub mae: f64,
}

impl RegressionMetrics {
    pub fn from_mse_mae(mse: f64, mae: f64) -> Self {
        Self {
            mse,
            rmse: mse.sqrt(),
            mae,
        }
    }
}

/// Test-set results for one score; either field is absent when the network
/// has no head of that kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreMetrics {
    pub score: Score,
    pub accuracy: Option<f64>,
    pub regression: Option<RegressionMetrics>,
}

impl ScoreMetrics {
    pub fn empty(score: Score) -> Self {
        Self {
            score,
            accuracy: None,
            regression: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub scores: Vec<ScoreMetrics>,
    /// Mean accuracy over the scores that have a classifier.
    pub mean_accuracy: Option<f64>,
}

impl Metrics {
    pub fn new(scores: Vec<ScoreMetrics>) -> Self {
        let accs: Vec<f64> = scores.iter().filter_map(|s| s.accuracy).collect();
        let mean_accuracy = (!accs.is_empty()).then(|| mean(&accs));
        Self {
            scores,
            mean_accuracy,
        }
    }

    pub fn score(&self, score: Score) -> Option<&ScoreMetrics> {
        self.scores.iter().find(|s| s.score == score)
    }

    /// Mean MSE over the scores that have a regressor.
    pub fn mean_mse(&self) -> Option<f64> {
        let mses: Vec<f64> = self
            .scores
            .iter()
            .filter_map(|s| s.regression.map(|r| r.mse))
            .collect();
        (!mses.is_empty()).then(|| mean(&mses))
    }

    /// Lower is better: error rate when there is a classifier, MSE otherwise.
    pub fn loss_key(&self) -> f64 {
        match self.mean_accuracy {
            Some(acc) => 1.0 - acc,
            None => self.mean_mse().unwrap_or(f64::INFINITY),
        }
    }

    /// Per-field mean over runs; RMSE is recomputed as the root of the mean MSE.
    pub fn average(runs: &[Metrics]) -> Result<Metrics> {
        let first = runs.first().ok_or(Error::EmptyTestSet)?;
        let mut scores = Vec::with_capacity(first.scores.len());
        for (i, template) in first.scores.iter().enumerate() {
            let column: Vec<&ScoreMetrics> = runs
                .iter()
                .map(|m| {
                    m.scores
                        .get(i)
                        .filter(|s| s.score == template.score)
                        .ok_or_else(|| Error::Shape("runs report different scores".into()))
                })
                .collect::<Result<_>>()?;
            let accuracy = collect_all(&column, |s| s.accuracy).map(|v| mean(&v));
            let regression = collect_all(&column, |s| s.regression).map(|v| {
                let mse = mean(&v.iter().map(|r| r.mse).collect::<Vec<_>>());
                let mae = mean(&v.iter().map(|r| r.mae).collect::<Vec<_>>());
                RegressionMetrics::from_mse_mae(mse, mae)
            });
            scores.push(ScoreMetrics {
                score: template.score,
                accuracy,
                regression,
            });
        }
        Ok(Metrics::new(scores))
    }
}

fn collect_all<T>(
    column: &[&ScoreMetrics],
    f: impl Fn(&ScoreMetrics) -> Option<T>,
) -> Option<Vec<T>> {
    column.iter().map(|s| f(s)).collect()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Fraction of outputs on the right side of the threshold.
pub fn evaluate_classification(probabilities: &[f64], severe: &[bool]) -> Result<f64> {
    if probabilities.len() != severe.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} labels",
            probabilities.len(),
            severe.len()
        )));
    }
    if probabilities.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let correct = probabilities
        .iter()
        .zip(severe)
        .filter(|(&p, &s)| (p > DECISION_THRESHOLD) == s)
        .count();
    Ok(correct as f64 / probabilities.len() as f64)
}

pub fn evaluate_regression(predictions: &[f64], targets: &[f64]) -> Result<RegressionMetrics> {
    if predictions.len() != targets.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let n = predictions.len() as f64;
    let (sq, abs) = predictions
        .iter()
        .zip(targets)
        .fold((0.0, 0.0), |(sq, abs), (p, t)| {
            let d = p - t;
            (sq + d * d, abs + d.abs())
        });
    Ok(RegressionMetrics::from_mse_mae(sq / n, abs / n))
}
