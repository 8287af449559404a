//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL line
//! each and exits non-zero if any failed. Criteria that need the canonical
//! recordings read them from `$UPDRS_DATA_DIR/parkinsons_updrs.data`.

mod common;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use updrs_core::architectures::{ArchitectureId, TaskKind};
use updrs_core::dataset::{
    column_statistics, load_dataset, reference_stats, resolve_dataset_path, synthetic, Dataset,
    Score, CANONICAL_RECORD_COUNT,
};
use updrs_core::experiment::{
    autoencoder_study, run_repetitions, EvalReport, ExperimentSpec, Target,
};
use updrs_core::preprocess::SplitBy;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn(&mut Context) -> Outcome);

const MLP_MIN_ACCURACY: f64 = 0.95;
const MIXED_MIN_ACCURACY: f64 = 0.97;
const ABLATION_MIN_GAP: f64 = 0.05;
const MLP_MAX_MSE: f64 = 5.0;
const AE_MAX_RATIO: f64 = 0.1;
const LATENT_WIDTH: usize = 10;
const ROUND_TRIP_TOLERANCE: f64 = 1e-12;

/// Canonical recordings and the full-size runs shared between criteria.
#[derive(Default)]
struct Context {
    dataset: Option<Result<Dataset, String>>,
    runs: HashMap<(ArchitectureId, TaskKind, Score, usize), EvalReport>,
}

impl Context {
    fn dataset_path() -> Result<PathBuf, String> {
        let missing =
            "dataset not found: set UPDRS_DATA_DIR to the directory holding parkinsons_updrs.data";
        let path = resolve_dataset_path(None).ok_or(missing)?;
        if path.is_file() {
            Ok(path)
        } else {
            Err(format!("{missing} (looked for {})", path.display()))
        }
    }

    fn dataset(&mut self) -> Result<&Dataset, String> {
        self.dataset
            .get_or_insert_with(|| {
                let path = Self::dataset_path()?;
                load_dataset(&path).map_err(|e| format!("{}: {e}", path.display()))
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Mean report over 5 repetitions with the default training setup and
    /// recording-level splits.
    fn report(
        &mut self,
        arch: ArchitectureId,
        kind: TaskKind,
        score: Score,
        n_hidden: usize,
    ) -> Result<EvalReport, String> {
        let key = (arch, kind, score, n_hidden);
        if let Some(r) = self.runs.get(&key) {
            return Ok(r.clone());
        }
        let data = self.dataset()?.clone();
        let mut spec = ExperimentSpec::new(arch, kind, Target::from(score));
        spec.n_hidden = n_hidden;
        spec.train.repetitions = 5;
        spec.train.split_by = SplitBy::Recording;
        let report = run_repetitions(&data, &spec)
            .map_err(|e| format!("{arch} {score}: {e}"))?
            .report;
        self.runs.insert(key, report.clone());
        Ok(report)
    }

    fn accuracy(
        &mut self,
        arch: ArchitectureId,
        score: Score,
        n_hidden: usize,
    ) -> Result<f64, String> {
        let r = self.report(arch, TaskKind::Classification, score, n_hidden)?;
        r.mean
            .score(score)
            .and_then(|m| m.accuracy)
            .ok_or_else(|| format!("{arch} reports no {score} accuracy"))
    }

    fn mse(&mut self, arch: ArchitectureId, score: Score) -> Result<f64, String> {
        // The mixed network regresses inside its classification run.
        let kind = if arch == ArchitectureId::Mixed {
            TaskKind::Classification
        } else {
            TaskKind::Regression
        };
        let r = self.report(arch, kind, score, 4)?;
        r.mean
            .score(score)
            .and_then(|m| m.regression)
            .map(|m| m.mse)
            .ok_or_else(|| format!("{arch} reports no {score} regression"))
    }
}

fn gradient_oracle(_: &mut Context) -> Outcome {
    let mut worst = 0.0f64;
    let mut parameters = 0;
    for arch in ArchitectureId::ALL {
        let r = common::gradient_check_architecture(arch, 20);
        if r.max_relative_error >= common::FD_TOLERANCE {
            return Err(format!(
                "{arch}: max relative error {:.3e}",
                r.max_relative_error
            ));
        }
        worst = worst.max(r.max_relative_error);
        parameters += r.parameters;
    }
    Ok(format!("5 architectures x 20 seeds, {parameters} parameters checked, max relative error {worst:.2e}"))
}

fn reference_statistics(ctx: &mut Context) -> Outcome {
    let data = ctx.dataset()?;
    let stats = column_statistics(data).map_err(|e| e.to_string())?;
    let comparison = reference_stats::compare(&stats);
    let off: Vec<String> = comparison
        .deviations
        .iter()
        .filter(|d| !d.within_tolerance)
        .map(|d| {
            format!(
                "{} {} {:.6} vs {}",
                d.feature, d.stat, d.computed, d.reference
            )
        })
        .collect();
    if data.len() != CANONICAL_RECORD_COUNT {
        return Err(format!(
            "{} records, expected {CANONICAL_RECORD_COUNT}",
            data.len()
        ));
    }
    if !off.is_empty() {
        return Err(format!(
            "{} statistics outside tolerance: {}",
            off.len(),
            off.join("; ")
        ));
    }
    Ok(format!(
        "{} records, {} statistics, max relative deviation {:.4}%",
        data.len(),
        comparison.deviations.len(),
        100.0 * comparison.max_relative_deviation
    ))
}

fn layer_ablation(ctx: &mut Context) -> Outcome {
    let mut detail = Vec::new();
    for score in Score::BOTH {
        let four = ctx.accuracy(ArchitectureId::Mlp, score, 4)?;
        let one = ctx.accuracy(ArchitectureId::Mlp, score, 1)?;
        let line = format!(
            "{score} 4 layers {:.2}% vs 1 layer {:.2}%",
            100.0 * four,
            100.0 * one
        );
        if four - one < ABLATION_MIN_GAP {
            return Err(format!(
                "{line}: gap below {:.0} points",
                100.0 * ABLATION_MIN_GAP
            ));
        }
        detail.push(line);
    }
    Ok(detail.join(", "))
}

fn classification_band(ctx: &mut Context) -> Outcome {
    let mut detail = Vec::new();
    let (mut mlp_sum, mut mixed_sum) = (0.0, 0.0);
    for score in Score::BOTH {
        let mlp = ctx.accuracy(ArchitectureId::Mlp, score, 4)?;
        let mixed = ctx.accuracy(ArchitectureId::Mixed, score, 4)?;
        let line = format!(
            "{score} mlp {:.2}% mixed {:.2}%",
            100.0 * mlp,
            100.0 * mixed
        );
        if mlp < MLP_MIN_ACCURACY || mixed < MIXED_MIN_ACCURACY {
            return Err(format!(
                "{line}: below {:.0}% / {:.0}%",
                100.0 * MLP_MIN_ACCURACY,
                100.0 * MIXED_MIN_ACCURACY
            ));
        }
        mlp_sum += mlp;
        mixed_sum += mixed;
        detail.push(line);
    }
    if mixed_sum < mlp_sum {
        return Err(format!("{}: mixed mean below mlp mean", detail.join(", ")));
    }
    Ok(detail.join(", "))
}

fn regression_band(ctx: &mut Context) -> Outcome {
    let mut detail = Vec::new();
    for score in Score::BOTH {
        let mlp = ctx.mse(ArchitectureId::Mlp, score)?;
        let mixed = ctx.mse(ArchitectureId::Mixed, score)?;
        let line = format!("{score} mse mlp {mlp:.4} mixed {mixed:.4}");
        if mixed > mlp {
            return Err(format!("{line}: mixed above mlp"));
        }
        if mlp > MLP_MAX_MSE {
            return Err(format!("{line}: mlp above {MLP_MAX_MSE}"));
        }
        detail.push(line);
    }
    Ok(detail.join(", "))
}

fn autoencoder_reconstruction(ctx: &mut Context) -> Outcome {
    let data = ctx.dataset()?.clone();
    let mut spec = ExperimentSpec::new(
        ArchitectureId::MlpAfterAe,
        TaskKind::Classification,
        Target::Motor,
    );
    spec.train.ae_epochs = Some(1000);
    let study = autoencoder_study(&data, &spec, spec.train.seed + 1).map_err(|e| e.to_string())?;
    if study.latent_width != LATENT_WIDTH {
        return Err(format!(
            "latent width {} (expected {LATENT_WIDTH})",
            study.latent_width
        ));
    }
    let (first, last) = (study.first_epoch_mse(), study.final_mse());
    let line = format!(
        "test mse epoch 1 {first:.6}, epoch {} {last:.6}",
        study.test_mse.len()
    );
    if last > AE_MAX_RATIO * first {
        return Err(format!(
            "{line}: ratio {:.3} above {AE_MAX_RATIO}",
            last / first
        ));
    }
    Ok(format!(
        "{line}, ratio {:.4}, latent width {}",
        last / first,
        study.latent_width
    ))
}

fn determinism(_: &mut Context) -> Outcome {
    let data = synthetic::generate(12, 15, 5);
    let mut worst = 0.0f64;
    for arch in ArchitectureId::ALL {
        for kind in [TaskKind::Classification, TaskKind::Regression] {
            let spec = common::quick_spec(arch, kind, common::target_for(arch));
            let a = run_repetitions(&data, &spec).map_err(|e| e.to_string())?;
            let b = run_repetitions(&data, &spec).map_err(|e| e.to_string())?;
            let ja = serde_json::to_string(&a.report).map_err(|e| e.to_string())?;
            let jb = serde_json::to_string(&b.report).map_err(|e| e.to_string())?;
            if ja != jb || a.best != b.best {
                return Err(format!("{arch} {kind:?}: reruns differ"));
            }
            let diff = common::checkpoint_round_trip(arch, kind, 100);
            if diff > ROUND_TRIP_TOLERANCE {
                return Err(format!(
                    "{arch} {kind:?}: checkpoint round trip differs by {diff:.3e}"
                ));
            }
            worst = worst.max(diff);
        }
    }
    Ok(format!(
        "identical reports for 5 architectures x 2 tasks, checkpoint round trip max difference {worst:.1e}"
    ))
}

fn property_suite(_: &mut Context) -> Outcome {
    let results = common::properties::all();
    let failed: Vec<String> = results
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    if failed.is_empty() {
        Ok(format!("{} properties hold", results.len()))
    } else {
        Err(failed.join("; "))
    }
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<String>()
        .cloned()
        .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "panicked".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("gradient oracle", gradient_oracle),
        ("reference column statistics", reference_statistics),
        ("layer ablation ordering", layer_ablation),
        ("classification accuracy band", classification_band),
        ("regression error band", regression_band),
        ("autoencoder reconstruction", autoencoder_reconstruction),
        ("determinism", determinism),
        ("property suite", property_suite),
    ];
    let mut ctx = Context::default();
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| check(&mut ctx)))
            .unwrap_or_else(|p| Err(panic_message(p)));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
