//! Training, evaluation, repetition averaging, grid search and the ablation
//! and comparison runners.

mod ablation;
mod grid;
mod metrics;
mod pipeline;
pub mod reference;
mod repetitions;
pub mod report;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::architectures::{ArchConfig, ArchitectureId, TaskKind, MAX_HIDDEN_LAYERS};
use crate::dataset::Score;
use crate::error::{Error, Result};
use crate::nn::{OptimizerConfig, OptimizerKind};
use crate::preprocess::{NormalizeOn, SplitBy};

pub use ablation::{run_ablation, AblationReport, AblationRow};
pub use grid::{grid_search, GridBudget, GridPoint, GridResult, GridSpec};
pub use metrics::{
    evaluate_classification, evaluate_regression, Metrics, RegressionMetrics, ScoreMetrics,
    DECISION_THRESHOLD,
};
pub use pipeline::{
    autoencoder_study, evaluate_model, fit_model, head_roles, AutoencoderStudy, FitOutcome,
    HeadRole, TrainedModel,
};
pub use repetitions::{
    run_repetitions, run_single, run_with_seeds, EvalReport, Repetition, RepetitionsOutcome,
    SingleRun, REPORT_SCHEMA_VERSION,
};
pub use report::{reproduce_tables, Tables};
pub use train::{train, train_with_monitor, TrainOptions};

/// Which UPDRS score(s) an experiment predicts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Motor,
    Total,
    Both,
}

impl Target {
    pub fn scores(self) -> Vec<Score> {
        match self {
            Target::Motor => vec![Score::Motor],
            Target::Total => vec![Score::Total],
            Target::Both => Score::BOTH.to_vec(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Target::Motor => "motor",
            Target::Total => "total",
            Target::Both => "both",
        }
    }
}

impl From<Score> for Target {
    fn from(s: Score) -> Self {
        match s {
            Score::Motor => Target::Motor,
            Score::Total => Target::Total,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "motor" => Ok(Target::Motor),
            "total" => Ok(Target::Total),
            "both" => Ok(Target::Both),
            other => Err(Error::Config(format!(
                "unknown score {other:?} (expected motor, total or both)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub repetitions: usize,
    pub task: Target,
    /// Regress on min-max scaled UPDRS; metrics are still reported on the raw scale.
    pub normalize_targets: bool,
    pub normalize_on: NormalizeOn,
    pub split_by: SplitBy,
    /// Epochs for the stand-alone autoencoder stage; defaults to `epochs`.
    pub ae_epochs: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 1000,
            batch_size: 20,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            seed: 0,
            repetitions: 5,
            task: Target::Motor,
            normalize_targets: false,
            normalize_on: NormalizeOn::Train,
            split_by: SplitBy::Recording,
            ae_epochs: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::Config(format!(
                "learning rate {} must be finite and non-negative",
                self.learning_rate
            )));
        }
        if self.ae_epochs == Some(0) {
            return Err(Error::Config("ae_epochs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn optimizer_config(&self) -> OptimizerConfig {
        match self.optimizer {
            OptimizerKind::Adam => OptimizerConfig::adam(self.learning_rate),
            OptimizerKind::Sgd => OptimizerConfig::sgd(self.learning_rate),
        }
    }

    pub fn options(&self) -> TrainOptions {
        TrainOptions {
            epochs: self.epochs,
            batch_size: self.batch_size,
            optimizer: self.optimizer_config(),
        }
    }

    pub fn autoencoder_options(&self) -> TrainOptions {
        TrainOptions {
            epochs: self.ae_epochs.unwrap_or(self.epochs),
            ..self.options()
        }
    }
}

/// Everything needed to train and evaluate one architecture on one task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub architecture: ArchitectureId,
    /// Ignored by `mixed`, which always has both heads.
    pub kind: TaskKind,
    /// Hidden-layer count of the plain `mlp`; other architectures use the full ladder.
    pub n_hidden: usize,
    pub arch: ArchConfig,
    pub train: TrainConfig,
}

impl ExperimentSpec {
    pub fn new(architecture: ArchitectureId, kind: TaskKind, target: Target) -> Self {
        Self {
            architecture,
            kind,
            n_hidden: 4,
            arch: ArchConfig::default(),
            train: TrainConfig {
                task: target,
                ..TrainConfig::default()
            },
        }
    }

    pub fn target(&self) -> Target {
        self.train.task
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if !(1..=MAX_HIDDEN_LAYERS).contains(&self.n_hidden) {
            return Err(Error::Config(format!(
                "n_hidden {} outside 1..={MAX_HIDDEN_LAYERS}",
                self.n_hidden
            )));
        }
        match (self.architecture, self.train.task) {
            (ArchitectureId::Double, Target::Both) => Ok(()),
            (ArchitectureId::Double, t) => Err(Error::Config(format!(
                "`double` predicts both scores; score must be `both`, not `{t}`"
            ))),
            (a, Target::Both) => Err(Error::Config(format!(
                "`{a}` predicts a single score; choose `motor` or `total`"
            ))),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_pairing() {
        let ok = ExperimentSpec::new(
            ArchitectureId::Mixed,
            TaskKind::Classification,
            Target::Motor,
        );
        assert!(ok.validate().is_ok());
        let bad = ExperimentSpec::new(
            ArchitectureId::Mixed,
            TaskKind::Classification,
            Target::Both,
        );
        assert!(bad.validate().is_err());
        let bad = ExperimentSpec::new(ArchitectureId::Double, TaskKind::Regression, Target::Total);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn config_bounds() {
        let mut spec =
            ExperimentSpec::new(ArchitectureId::Mlp, TaskKind::Classification, Target::Motor);
        spec.train.batch_size = 0;
        assert!(spec.validate().is_err());
        spec.train.batch_size = 20;
        spec.train.epochs = 0;
        assert!(spec.validate().is_err());
        spec.train.epochs = 1;
        spec.n_hidden = 6;
        assert!(spec.validate().is_err());
    }
}
