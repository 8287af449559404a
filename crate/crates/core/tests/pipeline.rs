mod common;

use std::collections::BTreeSet;

use common::{quick_spec, target_for, TrackingSource};
use updrs_core::architectures::{ArchitectureId, TaskKind};
use updrs_core::dataset::{synthetic, Dataset, RecordSource, Score};
use updrs_core::experiment::{
    autoencoder_study, evaluate_model, fit_model, grid_search, run_repetitions, run_single,
    GridBudget, GridSpec, Target,
};
use updrs_core::nn::Activation;
use updrs_core::preprocess::{carve_validation, split, SplitBy};
use updrs_core::Error;

fn data() -> Dataset {
    synthetic::generate(12, 15, 5)
}

fn spec_for(arch: ArchitectureId) -> updrs_core::experiment::ExperimentSpec {
    quick_spec(arch, TaskKind::Classification, target_for(arch))
}

#[test]
fn repetitions_are_deterministic_for_every_architecture() {
    let d = data();
    for arch in ArchitectureId::ALL {
        for kind in [TaskKind::Classification, TaskKind::Regression] {
            let spec = quick_spec(arch, kind, target_for(arch));
            let a = run_repetitions(&d, &spec).unwrap();
            let b = run_repetitions(&d, &spec).unwrap();
            assert_eq!(
                serde_json::to_string(&a.report).unwrap(),
                serde_json::to_string(&b.report).unwrap(),
                "{arch} {kind:?}"
            );
            assert_eq!(a.best, b.best, "{arch} {kind:?}");
        }
    }
}

#[test]
fn fitting_reads_only_training_rows() {
    let d = data();
    for arch in ArchitectureId::ALL {
        let spec = spec_for(arch);
        let s = split(&d, 3, SplitBy::Recording);
        let tracking = TrackingSource::new(&d);
        fit_model(&tracking, &s.train_indices, &spec, 3).unwrap();
        let train: BTreeSet<usize> = s.train_indices.iter().copied().collect();
        let touched = tracking.touched();
        assert!(touched.is_subset(&train), "{arch} read test rows");
        assert_eq!(touched, train, "{arch}");
    }
}

#[test]
fn grid_search_never_reads_test_rows() {
    let d = data();
    let mut base = spec_for(ArchitectureId::Mlp);
    base.train.seed = 4;
    let grid = GridSpec {
        losses: vec![updrs_core::nn::LossKind::BinaryCrossEntropy],
        activations: vec![Activation::Relu, Activation::Sigmoid],
        batch_sizes: vec![20],
        learning_rates: vec![1e-2, 1e-3],
    };
    let budget = GridBudget {
        epochs: 3,
        validation_fraction: 0.1,
    };
    let tracking = TrackingSource::new(&d);
    let results = grid_search(&tracking, &grid, &base, &budget).unwrap();
    assert_eq!(results.len(), 4);
    assert_eq!(
        results.iter().map(|r| r.rank).collect::<Vec<_>>(),
        vec![1, 2, 3, 4]
    );
    for w in results.windows(2) {
        assert!(w[0].validation.loss_key() <= w[1].validation.loss_key());
    }
    let outer = split(&d, 4, SplitBy::Recording);
    let test: BTreeSet<usize> = outer.test_indices.iter().copied().collect();
    assert!(tracking.touched().is_disjoint(&test));
    let (_, validation) = carve_validation(&outer.train_indices, 0.1, 4);
    assert_eq!(
        validation.len(),
        (outer.train_indices.len() as f64 * 0.1).round() as usize
    );
}

#[test]
fn mixed_reports_accuracy_and_regression() {
    let d = data();
    let out = run_repetitions(&d, &spec_for(ArchitectureId::Mixed)).unwrap();
    let m = out.report.mean.score(Score::Motor).unwrap();
    assert!(m.accuracy.is_some() && m.regression.is_some());
    assert_eq!(
        out.report.tasks,
        vec![TaskKind::Classification, TaskKind::Regression]
    );
    assert_eq!(out.report.n_hidden, None);
}

#[test]
fn double_reports_both_scores() {
    let d = data();
    for kind in [TaskKind::Classification, TaskKind::Regression] {
        let out =
            run_repetitions(&d, &quick_spec(ArchitectureId::Double, kind, Target::Both)).unwrap();
        for score in Score::BOTH {
            let m = out.report.mean.score(score).unwrap();
            match kind {
                TaskKind::Classification => assert!(m.accuracy.is_some()),
                TaskKind::Regression => assert!(m.regression.is_some()),
            }
        }
    }
}

#[test]
fn scaled_targets_report_raw_scale_errors() {
    let d = data();
    let mut spec = quick_spec(ArchitectureId::Mlp, TaskKind::Regression, Target::Motor);
    spec.train.epochs = 40;
    spec.train.learning_rate = 1e-2;
    spec.train.normalize_targets = true;
    let run = run_single(&d, &spec, 1).unwrap();
    let rmse = run
        .metrics
        .score(Score::Motor)
        .unwrap()
        .regression
        .unwrap()
        .rmse;
    assert!(run.fit.model.target_scaler.is_some());
    // Motor spans roughly 6..45 on this data: a raw-scale RMSE is well above
    // anything achievable on the [0, 1] scaled targets.
    assert!(rmse > 0.5 && rmse < 20.0, "{rmse}");
    let preds = run
        .fit
        .model
        .predict_rows(&[d.records[0].features])
        .unwrap();
    assert!(preds[0][0] > 1.5, "prediction not unscaled: {:?}", preds[0]);
}

#[test]
fn subject_split_keeps_subjects_apart() {
    let d = data();
    for seed in 0..5 {
        let s = split(&d, seed, SplitBy::Subject);
        let subjects = |idx: &[usize]| {
            idx.iter()
                .map(|&i| d.record(i).subject_id)
                .collect::<BTreeSet<_>>()
        };
        assert!(subjects(&s.train_indices).is_disjoint(&subjects(&s.test_indices)));
        assert_eq!(subjects(&s.train_indices).len(), 9);
        assert_eq!(s.train_indices.len() + s.test_indices.len(), d.len());
    }
    let mut spec = spec_for(ArchitectureId::Mlp);
    spec.train.split_by = SplitBy::Subject;
    let out = run_repetitions(&d, &spec).unwrap();
    assert_eq!(out.report.repetitions[0].train_size, 9 * 15);
}

#[test]
fn divergence_names_the_repetition() {
    let mut d = data();
    for r in &mut d.records {
        r.motor_updrs = 1e200;
    }
    let mut spec = quick_spec(ArchitectureId::Mlp, TaskKind::Regression, Target::Motor);
    spec.train.repetitions = 1;
    let err = run_repetitions(&d, &spec).unwrap_err();
    match err {
        Error::Repetition { index, source } => {
            assert_eq!(index, 1);
            assert!(
                matches!(
                    *source,
                    Error::NonFiniteLoss { .. } | Error::NonFiniteGradient { .. }
                ),
                "{source}"
            );
        }
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn repetition_seeds_follow_the_base_seed() {
    let d = data();
    let mut spec = spec_for(ArchitectureId::Mlp);
    spec.train.seed = 40;
    spec.train.repetitions = 3;
    let out = run_repetitions(&d, &spec).unwrap();
    assert_eq!(out.report.seeds(), vec![41, 42, 43]);
    assert_eq!(out.loss_traces.len(), 3);
    assert!(out.loss_traces.iter().all(|t| t.len() == spec.train.epochs));
}

#[test]
fn best_repetition_has_lowest_error() {
    let d = data();
    let mut spec = spec_for(ArchitectureId::Mlp);
    spec.train.repetitions = 4;
    let out = run_repetitions(&d, &spec).unwrap();
    let keys: Vec<f64> = out
        .report
        .repetitions
        .iter()
        .map(|r| r.metrics.loss_key())
        .collect();
    let best = out.report.best_repetition;
    assert!(keys.iter().all(|&k| keys[best] <= k));
    assert!(
        keys[..best].iter().all(|&k| k > keys[best]),
        "ties keep the first run"
    );
    assert_eq!(out.best.seed, out.report.repetitions[best].seed);
}

#[test]
fn mixed_fits_its_training_rows() {
    let d = data();
    let mut spec = spec_for(ArchitectureId::Mixed);
    spec.train.epochs = 60;
    spec.train.ae_epochs = Some(30);
    spec.train.learning_rate = 5e-3;
    let s = split(&d, 2, SplitBy::Recording);
    let fit = fit_model(&d, &s.train_indices, &spec, 2).unwrap();
    let train_metrics = evaluate_model(&fit.model, &d, &s.train_indices).unwrap();
    let motor = train_metrics.score(Score::Motor).unwrap();
    let rmse = motor.regression.unwrap().rmse;
    let targets: Vec<f64> = s
        .train_indices
        .iter()
        .map(|&i| d.record(i).motor_updrs)
        .collect();
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let spread =
        (targets.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / targets.len() as f64).sqrt();
    assert!(rmse < spread, "rmse {rmse} vs target spread {spread}");
    assert!(motor.accuracy.unwrap() > 0.6);
    assert!(fit.encoder_loss_trace.is_some_and(|t| t.len() == 30));
}

#[test]
fn autoencoder_study_tracks_every_epoch() {
    let d = data();
    let mut spec = spec_for(ArchitectureId::MlpAfterAe);
    spec.train.ae_epochs = Some(25);
    let study = autoencoder_study(&d, &spec, 7).unwrap();
    assert_eq!(study.test_mse.len(), 25);
    assert_eq!(study.latent_width, 4);
    assert!(study.test_mse.iter().all(|v| v.is_finite() && *v >= 0.0));
    assert!(study.final_mse() < study.first_epoch_mse());
    assert_eq!(autoencoder_study(&d, &spec, 7).unwrap(), study);
}
