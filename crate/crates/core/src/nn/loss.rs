use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Predictions are clamped to `[ε, 1 − ε]` before taking logs.
pub const BCE_EPSILON: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    BinaryCrossEntropy,
    MeanSquaredError,
}

impl LossKind {
    /// Loss of a single prediction/target pair.
    pub fn pointwise(self, prediction: f64, target: f64) -> f64 {
        match self {
            LossKind::BinaryCrossEntropy => bce_loss(prediction, target),
            LossKind::MeanSquaredError => (prediction - target).powi(2),
        }
    }

    /// d(pointwise)/d(prediction).
    pub fn pointwise_grad(self, prediction: f64, target: f64) -> f64 {
        match self {
            LossKind::BinaryCrossEntropy => bce_grad(prediction, target),
            LossKind::MeanSquaredError => 2.0 * (prediction - target),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::BinaryCrossEntropy => "bce",
            LossKind::MeanSquaredError => "mse",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bce" | "binary_cross_entropy" => Ok(LossKind::BinaryCrossEntropy),
            "mse" | "mean_squared_error" => Ok(LossKind::MeanSquaredError),
            other => Err(Error::Config(format!(
                "unknown loss {other:?} (expected bce or mse)"
            ))),
        }
    }
}

/// A loss attached to one output head, scaled by `weight` in the total objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Loss {
    pub kind: LossKind,
    pub weight: f64,
}

fn clamp_probability(p: f64) -> f64 {
    p.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON)
}

pub fn bce_loss(prediction: f64, target: f64) -> f64 {
    let p = clamp_probability(prediction);
    -(target * p.ln() + (1.0 - target) * (1.0 - p).ln())
}

pub fn bce_grad(prediction: f64, target: f64) -> f64 {
    let p = clamp_probability(prediction);
    -target / p + (1.0 - target) / (1.0 - p)
}

pub fn mse_loss(prediction: &[f64], target: &[f64]) -> Result<f64> {
    if prediction.len() != target.len() {
        return Err(Error::Shape(format!(
            "mse over {} predictions and {} targets",
            prediction.len(),
            target.len()
        )));
    }
    if prediction.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = prediction
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t).powi(2))
        .sum();
    Ok(sum / prediction.len() as f64)
}
