use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::Metrics;
use super::pipeline::{evaluate_model, fit_model};
use super::ExperimentSpec;
use crate::dataset::RecordSource;
use crate::error::{Error, Result};
use crate::nn::{Activation, LossKind};
use crate::preprocess::{carve_validation, split};

/// Axes of the hyper-parameter grid. The loss axis applies to classification heads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub losses: Vec<LossKind>,
    pub activations: Vec<Activation>,
    pub batch_sizes: Vec<usize>,
    pub learning_rates: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            losses: vec![LossKind::BinaryCrossEntropy, LossKind::MeanSquaredError],
            activations: vec![Activation::Relu, Activation::Sigmoid],
            batch_sizes: vec![10, 20, 50],
            learning_rates: vec![1e-2, 1e-3, 1e-4],
        }
    }
}

impl GridSpec {
    /// Cartesian product in axis order (loss outermost, learning rate innermost).
    pub fn points(&self) -> Vec<GridPoint> {
        let mut points = Vec::new();
        for &loss in &self.losses {
            for &activation in &self.activations {
                for &batch_size in &self.batch_sizes {
                    for &learning_rate in &self.learning_rates {
                        points.push(GridPoint {
                            loss,
                            activation,
                            batch_size,
                            learning_rate,
                        });
                    }
                }
            }
        }
        points
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub loss: LossKind,
    pub activation: Activation,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl GridPoint {
    pub fn apply(&self, spec: &ExperimentSpec) -> ExperimentSpec {
        let mut s = spec.clone();
        s.arch.classification_loss = self.loss;
        s.arch.hidden_activation = self.activation;
        s.train.batch_size = self.batch_size;
        s.train.learning_rate = self.learning_rate;
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridBudget {
    pub epochs: usize,
    pub validation_fraction: f64,
}

impl Default for GridBudget {
    fn default() -> Self {
        Self {
            epochs: 200,
            validation_fraction: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    /// 1-based rank, best first.
    pub rank: usize,
    pub point: GridPoint,
    pub validation: Metrics,
}

/// Scores every grid point on a validation slice carved from the training
/// split; test rows are never read. Ties keep grid order.
pub fn grid_search<S: RecordSource + ?Sized>(
    source: &S,
    grid: &GridSpec,
    base: &ExperimentSpec,
    budget: &GridBudget,
) -> Result<Vec<GridResult>> {
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if !(budget.validation_fraction > 0.0 && budget.validation_fraction < 1.0) {
        return Err(Error::Config(format!(
            "validation fraction {} outside (0, 1)",
            budget.validation_fraction
        )));
    }
    let seed = base.train.seed;
    let outer = split(source, seed, base.train.split_by);
    let (inner_train, validation) =
        carve_validation(&outer.train_indices, budget.validation_fraction, seed);
    if validation.is_empty() {
        return Err(Error::EmptyTestSet);
    }

    let scored: Vec<(GridPoint, Metrics)> = points
        .par_iter()
        .map(|point| {
            let mut spec = point.apply(base);
            spec.train.epochs = budget.epochs;
            spec.train.ae_epochs = Some(budget.epochs);
            spec.train.repetitions = 1;
            let fit = fit_model(source, &inner_train, &spec, seed)?;
            let metrics = evaluate_model(&fit.model, source, &validation)?;
            Ok((*point, metrics))
        })
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| {
        let (ma, mb) = (&scored[a].1, &scored[b].1);
        ma.loss_key().total_cmp(&mb.loss_key()).then_with(|| {
            let mse = |m: &Metrics| m.mean_mse().unwrap_or(f64::INFINITY);
            mse(ma).total_cmp(&mse(mb))
        })
    });
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(rank, i)| GridResult {
            rank: rank + 1,
            point: scored[i].0,
            validation: scored[i].1.clone(),
        })
        .collect())
}
