use std::fmt;

use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::loss::LossKind;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub size: usize,
    pub activation: Activation,
    #[serde(default)]
    pub dropout: f64,
}

impl LayerSpec {
    pub fn new(size: usize, activation: Activation) -> Self {
        Self {
            size,
            activation,
            dropout: 0.0,
        }
    }

    pub fn with_dropout(mut self, rate: f64) -> Self {
        self.dropout = rate;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadKind {
    Classification,
    Regression,
    Reconstruction,
}

impl fmt::Display for HeadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeadKind::Classification => "classification",
            HeadKind::Regression => "regression",
            HeadKind::Reconstruction => "reconstruction",
        })
    }
}

/// An output branch hanging off the shared trunk.
///
/// `hidden` layers sit between the trunk output and the head's output layer
/// (the decoder of an autoencoder lives here); plain task heads leave it empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeadSpec {
    pub kind: HeadKind,
    pub out_dim: usize,
    #[serde(default)]
    pub hidden: Vec<LayerSpec>,
    pub activation: Activation,
    pub loss: LossKind,
    pub loss_weight: f64,
}

impl HeadSpec {
    /// Sigmoid output(s) trained with binary cross-entropy.
    pub fn classification(out_dim: usize) -> Self {
        Self {
            kind: HeadKind::Classification,
            out_dim,
            hidden: Vec::new(),
            activation: Activation::Sigmoid,
            loss: LossKind::BinaryCrossEntropy,
            loss_weight: 1.0,
        }
    }

    /// ReLU output(s) trained with mean squared error.
    pub fn regression(out_dim: usize) -> Self {
        Self {
            kind: HeadKind::Regression,
            out_dim,
            hidden: Vec::new(),
            activation: Activation::Relu,
            loss: LossKind::MeanSquaredError,
            loss_weight: 1.0,
        }
    }

    /// Linear decoder output trained with mean squared error against the input.
    pub fn reconstruction(out_dim: usize, hidden: Vec<LayerSpec>) -> Self {
        Self {
            kind: HeadKind::Reconstruction,
            out_dim,
            hidden,
            activation: Activation::Linear,
            loss: LossKind::MeanSquaredError,
            loss_weight: 1.0,
        }
    }

    pub fn with_loss_weight(mut self, weight: f64) -> Self {
        self.loss_weight = weight;
        self
    }
}

/// Declarative description of a network: a shared trunk of dense layers and
/// one or more heads attached to the trunk output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub hidden: Vec<LayerSpec>,
    pub heads: Vec<HeadSpec>,
}

impl NetworkSpec {
    pub fn trunk_output_dim(&self) -> usize {
        self.hidden.last().map_or(self.input_dim, |l| l.size)
    }

    /// `[input, hidden..., head output]` for every head, in order.
    pub fn head_layer_sizes(&self, head: usize) -> Vec<usize> {
        let mut sizes = vec![self.input_dim];
        sizes.extend(self.hidden.iter().map(|l| l.size));
        let h = &self.heads[head];
        sizes.extend(h.hidden.iter().map(|l| l.size));
        sizes.push(h.out_dim);
        sizes
    }

    pub fn parameter_count(&self) -> usize {
        let mut count = 0;
        let mut prev = self.input_dim;
        for layer in &self.hidden {
            count += prev * layer.size + layer.size;
            prev = layer.size;
        }
        let trunk_out = prev;
        for head in &self.heads {
            let mut prev = trunk_out;
            for layer in &head.hidden {
                count += prev * layer.size + layer.size;
                prev = layer.size;
            }
            count += prev * head.out_dim + head.out_dim;
        }
        count
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Config("input_dim must be positive".into()));
        }
        if self.heads.is_empty() {
            return Err(Error::Config("a network needs at least one head".into()));
        }
        let layers = self
            .hidden
            .iter()
            .chain(self.heads.iter().flat_map(|h| h.hidden.iter()));
        for layer in layers {
            if layer.size == 0 {
                return Err(Error::Config("layer sizes must be positive".into()));
            }
            if !(0.0..1.0).contains(&layer.dropout) {
                return Err(Error::Config(format!(
                    "dropout rate {} outside [0, 1)",
                    layer.dropout
                )));
            }
        }
        for (i, head) in self.heads.iter().enumerate() {
            if head.out_dim == 0 {
                return Err(Error::Config(format!("head {i} has zero outputs")));
            }
            if !(head.loss_weight.is_finite() && head.loss_weight >= 0.0) {
                return Err(Error::Config(format!(
                    "head {i} loss weight {} must be finite and non-negative",
                    head.loss_weight
                )));
            }
            match head.kind {
                HeadKind::Classification | HeadKind::Regression if head.out_dim > 2 => {
                    return Err(Error::Config(format!(
                        "{} head {i} has width {}; expected 1 or 2",
                        head.kind, head.out_dim
                    )));
                }
                HeadKind::Reconstruction if head.out_dim != self.input_dim => {
                    return Err(Error::Config(format!(
                        "reconstruction head {i} has width {}, input has {}",
                        head.out_dim, self.input_dim
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }
}
