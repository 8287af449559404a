use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::matrix::Matrix;
use super::rng::Rng;
use crate::error::{Error, Result};

/// Glorot-uniform matrix of shape `fan_in × fan_out`,
/// drawn from `U(−√(6/(in+out)), +√(6/(in+out)))`.
pub fn init_weights(fan_in: usize, fan_out: usize, rng: &mut Rng) -> Result<Matrix> {
    if fan_in == 0 || fan_out == 0 {
        return Err(Error::Shape(format!(
            "weight shape {fan_in}x{fan_out} must be positive"
        )));
    }
    let limit = glorot_limit(fan_in, fan_out);
    let data = (0..fan_in * fan_out)
        .map(|_| rng.gen_range(-limit..limit))
        .collect();
    Matrix::from_vec(fan_in, fan_out, data)
}

pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
    /// Inverted-dropout rate applied after the activation in training mode.
    pub dropout: f64,
}

impl DenseLayer {
    pub fn new(
        fan_in: usize,
        fan_out: usize,
        activation: Activation,
        dropout: f64,
        rng: &mut Rng,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&dropout) {
            return Err(Error::Config(format!(
                "dropout rate {dropout} outside [0, 1)"
            )));
        }
        Ok(Self {
            weights: init_weights(fan_in, fan_out, rng)?,
            bias: vec![0.0; fan_out],
            activation,
            dropout,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.rows() * self.weights.cols() + self.bias.len()
    }

    pub(crate) fn check_consistent(&self) -> Result<()> {
        if self.bias.len() != self.weights.cols() {
            return Err(Error::Shape(format!(
                "bias of length {} for {} outputs",
                self.bias.len(),
                self.weights.cols()
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Shape(format!(
                "dropout rate {} outside [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }

    /// Affine part `x·W + b`.
    pub fn pre_activation(&self, input: &Matrix) -> Result<Matrix> {
        let mut z = input.matmul(&self.weights)?;
        z.add_row_vector(&self.bias)?;
        Ok(z)
    }
}

/// Gradient of the objective with respect to one layer's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGradient {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl LayerGradient {
    pub fn zeros_like(layer: &DenseLayer) -> Self {
        Self {
            weights: Matrix::zeros(layer.weights.rows(), layer.weights.cols()),
            bias: vec![0.0; layer.bias.len()],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.is_finite() && self.bias.iter().all(|b| b.is_finite())
    }
}
