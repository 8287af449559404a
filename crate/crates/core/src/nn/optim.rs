use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::layer::LayerGradient;
use super::network::{Gradients, Network};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(Error::Config(format!(
                "unknown optimizer {other:?} (expected sgd or adam)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self::adam(1e-3)
    }
}

impl OptimizerConfig {
    pub fn adam(learning_rate: f64) -> Self {
        Self {
            kind: OptimizerKind::Adam,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn sgd(learning_rate: f64) -> Self {
        Self {
            kind: OptimizerKind::Sgd,
            ..Self::adam(learning_rate)
        }
    }
}

/// Mutable optimizer state (Adam moments and step count) for one network.
pub struct Optimizer {
    config: OptimizerConfig,
    step: i32,
    first_moment: Option<Gradients>,
    second_moment: Option<Gradients>,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig) -> Self {
        Self {
            config,
            step: 0,
            first_moment: None,
            second_moment: None,
        }
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    /// Applies one update. Every gradient is checked for finiteness before any
    /// weight is touched, so a failed step leaves the network unchanged.
    pub fn step(&mut self, network: &mut Network, grads: &Gradients) -> Result<()> {
        for (id, g) in grads.iter() {
            if !g.is_finite() {
                return Err(Error::NonFiniteGradient {
                    layer: id.to_string(),
                });
            }
        }
        let lr = self.config.learning_rate;
        match self.config.kind {
            OptimizerKind::Sgd => {
                for ((_, layer), (_, g)) in network.layers_mut().zip(grads.iter()) {
                    check_shape(&layer.weights, &layer.bias, g)?;
                    for (w, d) in layer.weights.data_mut().iter_mut().zip(g.weights.data()) {
                        *w -= lr * d;
                    }
                    for (b, d) in layer.bias.iter_mut().zip(&g.bias) {
                        *b -= lr * d;
                    }
                }
            }
            OptimizerKind::Adam => {
                let m = self
                    .first_moment
                    .get_or_insert_with(|| Gradients::zeros_like(network));
                let v = self
                    .second_moment
                    .get_or_insert_with(|| Gradients::zeros_like(network));
                self.step += 1;
                let OptimizerConfig {
                    beta1,
                    beta2,
                    epsilon,
                    ..
                } = self.config;
                let bc1 = 1.0 - beta1.powi(self.step);
                let bc2 = 1.0 - beta2.powi(self.step);
                let update = |w: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    let m_hat = *m / bc1;
                    let v_hat = *v / bc2;
                    *w -= lr * m_hat / (v_hat.sqrt() + epsilon);
                };
                let layers = network.layers_mut().zip(grads.iter());
                for (((_, layer), (_, g)), ((_, m), (_, v))) in
                    layers.zip(m.iter_mut().zip(v.iter_mut()))
                {
                    check_shape(&layer.weights, &layer.bias, g)?;
                    let wm = m.weights.data_mut().iter_mut();
                    let wv = v.weights.data_mut().iter_mut();
                    for (((w, &g), m), v) in layer
                        .weights
                        .data_mut()
                        .iter_mut()
                        .zip(g.weights.data())
                        .zip(wm)
                        .zip(wv)
                    {
                        update(w, g, m, v);
                    }
                    for (((b, &g), m), v) in layer
                        .bias
                        .iter_mut()
                        .zip(&g.bias)
                        .zip(m.bias.iter_mut())
                        .zip(v.bias.iter_mut())
                    {
                        update(b, g, m, v);
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_shape(weights: &super::Matrix, bias: &[f64], g: &LayerGradient) -> Result<()> {
    if weights.shape() != g.weights.shape() || bias.len() != g.bias.len() {
        return Err(Error::Shape(format!(
            "gradient {:?} for weights {:?}",
            g.weights.shape(),
            weights.shape()
        )));
    }
    Ok(())
}
