use serde::{Deserialize, Serialize};

use super::repetitions::{run_repetitions, EvalReport};
use super::{ExperimentSpec, Target};
use crate::architectures::{ArchitectureId, TaskKind, MAX_HIDDEN_LAYERS};
use crate::dataset::{RecordSource, Score};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub n_hidden: usize,
    pub classification: EvalReport,
    pub regression: EvalReport,
}

impl AblationRow {
    pub fn accuracy(&self) -> Option<f64> {
        self.classification.mean.mean_accuracy
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub score: Score,
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    pub fn row(&self, n_hidden: usize) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.n_hidden == n_hidden)
    }
}

/// Plain MLP with 1 to 5 hidden layers, trained once as a classifier and once
/// as a regressor for `score`.
pub fn run_ablation<S: RecordSource + ?Sized>(
    source: &S,
    score: Score,
    base: &ExperimentSpec,
) -> Result<AblationReport> {
    let mut rows = Vec::with_capacity(MAX_HIDDEN_LAYERS);
    for n_hidden in 1..=MAX_HIDDEN_LAYERS {
        let spec_for = |kind| ExperimentSpec {
            architecture: ArchitectureId::Mlp,
            kind,
            n_hidden,
            arch: base.arch.clone(),
            train: super::TrainConfig {
                task: Target::from(score),
                ..base.train.clone()
            },
        };
        let classification = run_repetitions(source, &spec_for(TaskKind::Classification))?.report;
        let regression = run_repetitions(source, &spec_for(TaskKind::Regression))?.report;
        rows.push(AblationRow {
            n_hidden,
            classification,
            regression,
        });
    }
    Ok(AblationReport { score, rows })
}
