use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::Metrics;
use super::pipeline::{evaluate_model, fit_model, head_roles, FitOutcome, HeadRole, TrainedModel};
use super::{ExperimentSpec, Target};
use crate::architectures::{ArchitectureId, TaskKind};
use crate::dataset::RecordSource;
use crate::error::{Error, Result};
use crate::preprocess::{split, Split};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Repetition {
    pub seed: u64,
    pub train_size: usize,
    pub test_size: usize,
    pub final_train_loss: f64,
    pub metrics: Metrics,
}

/// Result of one architecture on one task, averaged over repetitions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub architecture_id: ArchitectureId,
    pub tasks: Vec<TaskKind>,
    pub target: Target,
    /// Hidden-layer count for the plain MLP; other architectures use the full ladder.
    pub n_hidden: Option<usize>,
    pub epochs: usize,
    pub repetitions: Vec<Repetition>,
    pub mean: Metrics,
    /// Index into `repetitions` of the run kept as the checkpoint.
    pub best_repetition: usize,
}

impl EvalReport {
    pub fn seeds(&self) -> Vec<u64> {
        self.repetitions.iter().map(|r| r.seed).collect()
    }
}

#[derive(Clone, Debug)]
pub struct SingleRun {
    pub split: Split,
    pub fit: FitOutcome,
    pub metrics: Metrics,
}

#[derive(Clone, Debug)]
pub struct RepetitionsOutcome {
    pub report: EvalReport,
    pub best: TrainedModel,
    pub loss_traces: Vec<Vec<f64>>,
}

/// Split, fit and evaluate once with the given seed.
pub fn run_single<S: RecordSource + ?Sized>(
    source: &S,
    spec: &ExperimentSpec,
    seed: u64,
) -> Result<SingleRun> {
    let split = split(source, seed, spec.train.split_by);
    if split.test_indices.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let fit = fit_model(source, &split.train_indices, spec, seed)?;
    let metrics = evaluate_model(&fit.model, source, &split.test_indices)?;
    Ok(SingleRun {
        split,
        fit,
        metrics,
    })
}

/// Runs one repetition per seed (in parallel) and averages their test metrics.
pub fn run_with_seeds<S: RecordSource + ?Sized>(
    source: &S,
    spec: &ExperimentSpec,
    seeds: &[u64],
) -> Result<RepetitionsOutcome> {
    spec.validate()?;
    if seeds.is_empty() {
        return Err(Error::Config("at least one repetition is required".into()));
    }
    let runs: Vec<SingleRun> = seeds
        .par_iter()
        .enumerate()
        .map(|(index, &seed)| {
            run_single(source, spec, seed).map_err(|e| Error::Repetition {
                index: index + 1,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let per_run: Vec<Metrics> = runs.iter().map(|r| r.metrics.clone()).collect();
    let mean = Metrics::average(&per_run)?;
    let best_repetition = per_run.iter().enumerate().fold(0, |best, (i, m)| {
        if m.loss_key() < per_run[best].loss_key() {
            i
        } else {
            best
        }
    });

    let tasks = head_roles(spec.architecture, spec.kind, spec.target())
        .into_iter()
        .filter_map(|r| match r {
            HeadRole::Task { kind, .. } => Some(kind),
            HeadRole::Reconstruction => None,
        })
        .collect();
    let repetitions = runs
        .iter()
        .map(|r| Repetition {
            seed: r.fit.model.seed,
            train_size: r.split.train_indices.len(),
            test_size: r.split.test_indices.len(),
            final_train_loss: r.fit.loss_trace.last().copied().unwrap_or(f64::NAN),
            metrics: r.metrics.clone(),
        })
        .collect();
    let loss_traces = runs.iter().map(|r| r.fit.loss_trace.clone()).collect();
    let best = runs
        .into_iter()
        .nth(best_repetition)
        .expect("best index is within runs")
        .fit
        .model;

    Ok(RepetitionsOutcome {
        report: EvalReport {
            schema_version: REPORT_SCHEMA_VERSION,
            architecture_id: spec.architecture,
            tasks,
            target: spec.target(),
            n_hidden: (spec.architecture == ArchitectureId::Mlp).then_some(spec.n_hidden),
            epochs: spec.train.epochs,
            repetitions,
            mean,
            best_repetition,
        },
        best,
        loss_traces,
    })
}

/// Repetition `r` (1-based) uses seed `spec.train.seed + r`.
pub fn run_repetitions<S: RecordSource + ?Sized>(
    source: &S,
    spec: &ExperimentSpec,
) -> Result<RepetitionsOutcome> {
    let seeds: Vec<u64> = (1..=spec.train.repetitions as u64)
        .map(|r| spec.train.seed.wrapping_add(r))
        .collect();
    run_with_seeds(source, spec, &seeds)
}
