//! Builders for the autoencoder and the five experiment architectures.
//!
//! | id             | input  | trunk                      | heads                                    |
//! |----------------|--------|----------------------------|------------------------------------------|
//! | `mlp`          | 19     | 100-200-300-100            | one task head (width 1)                  |
//! | `mlp-after-ae` | 10     | 100-200-300-100            | one task head, input from frozen encoder |
//! | `ae-joint`     | 19     | encoder 200-10             | decoder 200-19 and task head on latent   |
//! | `double`       | 19     | 100-200-300-100            | one task head of width 2 (motor, total)  |
//! | `mixed`        | 10     | 100-200-300-100            | sigmoid classifier + relu regressor      |
//!
//! Every hidden ladder is configurable through [`ArchConfig`] so the same
//! builders produce the small networks used in gradient checks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::FEATURE_COUNT;
use crate::error::{Error, Result};
use crate::nn::{Activation, HeadKind, LayerSpec, LossKind, Network};

pub use crate::nn::{HeadSpec, NetworkSpec};

pub const DEFAULT_LADDER: [usize; 4] = [100, 200, 300, 100];
pub const AE_HIDDEN: usize = 200;
pub const LATENT_DIM: usize = 10;
pub const DEFAULT_DROPOUT: f64 = 0.2;
pub const MAX_HIDDEN_LAYERS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ArchitectureId {
    Mlp,
    MlpAfterAe,
    AeJoint,
    Double,
    Mixed,
}

impl ArchitectureId {
    pub const ALL: [ArchitectureId; 5] = [
        ArchitectureId::Mlp,
        ArchitectureId::MlpAfterAe,
        ArchitectureId::AeJoint,
        ArchitectureId::Double,
        ArchitectureId::Mixed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ArchitectureId::Mlp => "mlp",
            ArchitectureId::MlpAfterAe => "mlp-after-ae",
            ArchitectureId::AeJoint => "ae-joint",
            ArchitectureId::Double => "double",
            ArchitectureId::Mixed => "mixed",
        }
    }

    /// Row label in the accuracy table.
    pub fn classification_label(self) -> &'static str {
        match self {
            ArchitectureId::Mlp => "MLP",
            ArchitectureId::MlpAfterAe => "MLP after AE",
            ArchitectureId::AeJoint => "MLP-AE",
            ArchitectureId::Double => "Double MLP",
            ArchitectureId::Mixed => "Mixed MLP",
        }
    }

    /// Row label in the regression tables.
    pub fn regression_label(self) -> &'static str {
        match self {
            ArchitectureId::AeJoint => "MLP + AE",
            other => other.classification_label(),
        }
    }

    pub fn needs_pretrained_encoder(self) -> bool {
        matches!(self, ArchitectureId::MlpAfterAe | ArchitectureId::Mixed)
    }
}

impl fmt::Display for ArchitectureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ArchitectureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ArchitectureId::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::UnknownArchitecture {
                given: s.to_string(),
                valid: ArchitectureId::ALL
                    .iter()
                    .map(|a| a.as_str().to_string())
                    .collect(),
            })
    }
}

impl TryFrom<String> for ArchitectureId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ArchitectureId> for String {
    fn from(a: ArchitectureId) -> Self {
        a.as_str().to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Classification,
    Regression,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Classification => "classification",
            TaskKind::Regression => "regression",
        }
    }

    fn head(self, out_dim: usize) -> HeadSpec {
        match self {
            TaskKind::Classification => HeadSpec::classification(out_dim),
            TaskKind::Regression => HeadSpec::regression(out_dim),
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classification" => Ok(TaskKind::Classification),
            "regression" => Ok(TaskKind::Regression),
            other => Err(Error::Config(format!(
                "unknown task kind {other:?} (expected classification or regression)"
            ))),
        }
    }
}

/// Free structural knobs. Defaults reproduce the full-size networks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArchConfig {
    pub input_dim: usize,
    pub ladder: Vec<usize>,
    pub hidden_activation: Activation,
    pub dropout: f64,
    /// 1-based hidden-layer positions followed by dropout.
    pub dropout_after: Vec<usize>,
    pub ae_hidden: usize,
    pub latent_dim: usize,
    /// Loss of classification heads (regression and reconstruction heads use MSE).
    pub classification_loss: LossKind,
    pub classification_weight: f64,
    pub regression_weight: f64,
    pub reconstruction_weight: f64,
}

impl Default for ArchConfig {
    fn default() -> Self {
        Self {
            input_dim: FEATURE_COUNT,
            ladder: DEFAULT_LADDER.to_vec(),
            hidden_activation: Activation::Relu,
            dropout: DEFAULT_DROPOUT,
            dropout_after: vec![2, 4],
            ae_hidden: AE_HIDDEN,
            latent_dim: LATENT_DIM,
            classification_loss: LossKind::BinaryCrossEntropy,
            classification_weight: 1.0,
            regression_weight: 1.0,
            reconstruction_weight: 1.0,
        }
    }
}

impl ArchConfig {
    /// Hidden sizes for an `n`-layer MLP: a prefix of the ladder, extended by
    /// repeating its last width when `n` exceeds the ladder length.
    pub fn ladder_for(&self, n_hidden: usize) -> Vec<usize> {
        let last = *self.ladder.last().unwrap_or(&1);
        (0..n_hidden)
            .map(|i| self.ladder.get(i).copied().unwrap_or(last))
            .collect()
    }

    fn hidden_layers(&self, n_hidden: usize) -> Vec<LayerSpec> {
        self.ladder_for(n_hidden)
            .into_iter()
            .enumerate()
            .map(|(i, size)| {
                let layer = LayerSpec::new(size, self.hidden_activation);
                if self.dropout > 0.0 && self.dropout_after.contains(&(i + 1)) {
                    layer.with_dropout(self.dropout)
                } else {
                    layer
                }
            })
            .collect()
    }

    fn task_head(&self, kind: TaskKind, out_dim: usize) -> HeadSpec {
        let mut head = kind.head(out_dim);
        match kind {
            TaskKind::Classification => {
                head.loss = self.classification_loss;
                head.loss_weight = self.classification_weight;
            }
            TaskKind::Regression => head.loss_weight = self.regression_weight,
        }
        head
    }

    pub fn autoencoder(&self) -> AutoencoderSpec {
        AutoencoderSpec {
            input_dim: self.input_dim,
            encoder_hidden: self.ae_hidden,
            latent: self.latent_dim,
            hidden_activation: self.hidden_activation,
        }
    }
}

fn check_layer_count(n_hidden: usize) -> Result<()> {
    if !(1..=MAX_HIDDEN_LAYERS).contains(&n_hidden) {
        return Err(Error::Config(format!(
            "hidden layer count {n_hidden} outside 1..={MAX_HIDDEN_LAYERS}"
        )));
    }
    Ok(())
}

/// Plain MLP over the raw features with one width-1 task head.
pub fn build_mlp(kind: TaskKind, n_hidden: usize) -> Result<NetworkSpec> {
    build_mlp_with(&ArchConfig::default(), kind, n_hidden)
}

pub fn build_mlp_with(cfg: &ArchConfig, kind: TaskKind, n_hidden: usize) -> Result<NetworkSpec> {
    check_layer_count(n_hidden)?;
    let spec = NetworkSpec {
        input_dim: cfg.input_dim,
        hidden: cfg.hidden_layers(n_hidden),
        heads: vec![cfg.task_head(kind, 1)],
    };
    spec.validate()?;
    Ok(spec)
}

/// Symmetric autoencoder `input → hidden → latent → hidden → input`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderSpec {
    pub input_dim: usize,
    pub encoder_hidden: usize,
    pub latent: usize,
    pub hidden_activation: Activation,
}

impl Default for AutoencoderSpec {
    fn default() -> Self {
        ArchConfig::default().autoencoder()
    }
}

impl AutoencoderSpec {
    pub fn layer_sizes(&self) -> Vec<usize> {
        vec![
            self.input_dim,
            self.encoder_hidden,
            self.latent,
            self.encoder_hidden,
            self.input_dim,
        ]
    }

    pub fn encoder_sizes(&self) -> Vec<usize> {
        vec![self.input_dim, self.encoder_hidden, self.latent]
    }

    pub fn decoder_sizes(&self) -> Vec<usize> {
        vec![self.latent, self.encoder_hidden, self.input_dim]
    }

    fn encoder_layers(&self) -> Vec<LayerSpec> {
        vec![
            LayerSpec::new(self.encoder_hidden, self.hidden_activation),
            LayerSpec::new(self.latent, Activation::Linear),
        ]
    }

    fn decoder_head(&self) -> HeadSpec {
        HeadSpec::reconstruction(
            self.input_dim,
            vec![LayerSpec::new(self.encoder_hidden, self.hidden_activation)],
        )
    }

    /// Encoder as trunk, decoder as a single reconstruction head.
    pub fn network_spec(&self) -> Result<NetworkSpec> {
        if self.latent >= self.input_dim {
            return Err(Error::Config(format!(
                "latent width {} must be below input width {}",
                self.latent, self.input_dim
            )));
        }
        let spec = NetworkSpec {
            input_dim: self.input_dim,
            hidden: self.encoder_layers(),
            heads: vec![self.decoder_head()],
        };
        spec.validate()?;
        Ok(spec)
    }
}

pub fn build_autoencoder() -> AutoencoderSpec {
    AutoencoderSpec::default()
}

/// Latent width of a trained autoencoder, or an error if `encoder` is not one.
fn latent_width(encoder: &Network, consumer: &str) -> Result<usize> {
    let spec = encoder.spec();
    let is_autoencoder = spec
        .heads
        .iter()
        .any(|h| h.kind == HeadKind::Reconstruction)
        && spec.trunk_output_dim() < spec.input_dim;
    if !is_autoencoder {
        return Err(Error::MissingEncoder(consumer.to_string()));
    }
    Ok(spec.trunk_output_dim())
}

/// MLP consuming frozen-encoder outputs; the input width comes from the encoder.
pub fn build_mlp_after_ae(kind: TaskKind, encoder: &Network) -> Result<NetworkSpec> {
    build_mlp_after_ae_with(&ArchConfig::default(), kind, encoder)
}

pub fn build_mlp_after_ae_with(
    cfg: &ArchConfig,
    kind: TaskKind,
    encoder: &Network,
) -> Result<NetworkSpec> {
    let latent = latent_width(encoder, ArchitectureId::MlpAfterAe.as_str())?;
    let spec = NetworkSpec {
        input_dim: latent,
        hidden: cfg.hidden_layers(cfg.ladder.len().clamp(1, MAX_HIDDEN_LAYERS)),
        heads: vec![cfg.task_head(kind, 1)],
    };
    spec.validate()?;
    Ok(spec)
}

/// Autoencoder trained jointly with a task head on its latent layer.
/// Heads are `[reconstruction, task]`.
pub fn build_joint_ae_head(kind: TaskKind) -> Result<NetworkSpec> {
    build_joint_ae_head_with(&ArchConfig::default(), kind)
}

pub fn build_joint_ae_head_with(cfg: &ArchConfig, kind: TaskKind) -> Result<NetworkSpec> {
    let mut spec = cfg.autoencoder().network_spec()?;
    spec.heads[0].loss_weight = cfg.reconstruction_weight;
    spec.heads.push(cfg.task_head(kind, 1));
    spec.validate()?;
    Ok(spec)
}

/// One network predicting (motor, total) through a width-2 head.
pub fn build_double_task(kind: TaskKind) -> Result<NetworkSpec> {
    build_double_task_with(&ArchConfig::default(), kind)
}

pub fn build_double_task_with(cfg: &ArchConfig, kind: TaskKind) -> Result<NetworkSpec> {
    let spec = NetworkSpec {
        input_dim: cfg.input_dim,
        hidden: cfg.hidden_layers(cfg.ladder.len().clamp(1, MAX_HIDDEN_LAYERS)),
        heads: vec![cfg.task_head(kind, 2)],
    };
    spec.validate()?;
    Ok(spec)
}

/// Classifier and regressor for the same score over the encoder's latent features.
/// Heads are `[classification, regression]`.
pub fn build_mixed(encoder: &Network) -> Result<NetworkSpec> {
    build_mixed_with(&ArchConfig::default(), encoder)
}

pub fn build_mixed_with(cfg: &ArchConfig, encoder: &Network) -> Result<NetworkSpec> {
    let latent = latent_width(encoder, ArchitectureId::Mixed.as_str())?;
    let spec = NetworkSpec {
        input_dim: latent,
        hidden: cfg.hidden_layers(cfg.ladder.len().clamp(1, MAX_HIDDEN_LAYERS)),
        heads: vec![
            cfg.task_head(TaskKind::Classification, 1),
            cfg.task_head(TaskKind::Regression, 1),
        ],
    };
    spec.validate()?;
    Ok(spec)
}
