#![allow(dead_code)]

pub mod properties;

use rand::Rng as _;
use updrs_core::architectures::{
    build_double_task_with, build_joint_ae_head_with, build_mixed_with, build_mlp_after_ae_with,
    build_mlp_with, ArchConfig, ArchitectureId, TaskKind,
};
use updrs_core::dataset::{Record, RecordSource};
use updrs_core::experiment::{ExperimentSpec, Target};
use updrs_core::nn::rng::seeded;
use updrs_core::nn::{HeadKind, Matrix, Mode, Network, Rng};

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOLERANCE: f64 = 1e-5;
/// Below this magnitude errors are effectively absolute; central differences
/// carry about 1e-11 of rounding noise.
pub const FD_FLOOR: f64 = 1e-5;

/// Small widths (19 -> 8 -> 4 -> heads) for fast checks.
pub fn desk_config() -> ArchConfig {
    ArchConfig {
        ladder: vec![8, 4],
        ae_hidden: 8,
        latent_dim: 4,
        dropout_after: vec![1],
        ..ArchConfig::default()
    }
}

pub fn desk_network(arch: ArchitectureId, kind: TaskKind, seed: u64) -> Network {
    let cfg = desk_config();
    let mut rng = seeded(seed);
    let encoder = || {
        Network::new(
            cfg.autoencoder().network_spec().unwrap(),
            &mut seeded(seed ^ 0xA5),
        )
        .unwrap()
    };
    let spec = match arch {
        ArchitectureId::Mlp => build_mlp_with(&cfg, kind, 2),
        ArchitectureId::MlpAfterAe => build_mlp_after_ae_with(&cfg, kind, &encoder()),
        ArchitectureId::AeJoint => build_joint_ae_head_with(&cfg, kind),
        ArchitectureId::Double => build_double_task_with(&cfg, kind),
        ArchitectureId::Mixed => build_mixed_with(&cfg, &encoder()),
    }
    .unwrap();
    let mut net = Network::new(spec, &mut rng).unwrap();
    // Zero biases put dead or dropped units exactly on a ReLU kink, where
    // central differences are meaningless; move off it.
    for (_, layer) in net.layers_mut() {
        for b in &mut layer.bias {
            *b = rng.gen_range(-0.5..0.5);
        }
    }
    net
}

pub fn random_batch(net: &Network, rows: usize, rng: &mut Rng) -> (Matrix, Vec<Matrix>) {
    let cols = net.input_dim();
    let x = Matrix::from_vec(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.gen_range(0.0..1.0)).collect(),
    )
    .unwrap();
    let targets = net
        .spec()
        .heads
        .iter()
        .map(|h| {
            let data = (0..rows * h.out_dim)
                .map(|_| match h.kind {
                    HeadKind::Classification => f64::from(u8::from(rng.gen_bool(0.5))),
                    HeadKind::Regression => rng.gen_range(0.0..2.0),
                    HeadKind::Reconstruction => rng.gen_range(0.0..1.0),
                })
                .collect();
            Matrix::from_vec(rows, h.out_dim, data).unwrap()
        })
        .collect();
    (x, targets)
}

#[derive(Debug, Clone, Copy)]
pub struct GradientCheck {
    pub max_relative_error: f64,
    pub parameters: usize,
}

fn loss_at(net: &Network, x: &Matrix, t: &[Matrix], dropout: &Rng) -> f64 {
    let pass = net.forward(x, Mode::Train(&mut dropout.clone())).unwrap();
    net.loss(&pass.outputs(), t).unwrap()
}

/// Central differences against backprop for every parameter, with the same
/// dropout masks in every evaluation.
pub fn gradient_check(net: &Network, x: &Matrix, t: &[Matrix], dropout: &Rng) -> GradientCheck {
    let pass = net.forward(x, Mode::Train(&mut dropout.clone())).unwrap();
    let grads = net.backward(&pass, t).unwrap();
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    let mut parameters = 0;
    for (id, g) in grads.iter() {
        let n_weights = g.weights.data().len();
        for p in 0..n_weights + g.bias.len() {
            let analytic = if p < n_weights {
                g.weights.data()[p]
            } else {
                g.bias[p - n_weights]
            };
            let slot = |net: &mut Network| -> *mut f64 {
                let layer = net.layer_mut(id);
                if p < n_weights {
                    &mut layer.weights.data_mut()[p]
                } else {
                    &mut layer.bias[p - n_weights]
                }
            };
            let original = unsafe { *slot(&mut probe) };
            unsafe { *slot(&mut probe) = original + FD_STEP };
            let plus = loss_at(&probe, x, t, dropout);
            unsafe { *slot(&mut probe) = original - FD_STEP };
            let minus = loss_at(&probe, x, t, dropout);
            unsafe { *slot(&mut probe) = original };
            let numeric = (plus - minus) / (2.0 * FD_STEP);
            let denom = analytic.abs().max(numeric.abs()).max(FD_FLOOR);
            worst = worst.max((analytic - numeric).abs() / denom);
            parameters += 1;
        }
    }
    GradientCheck {
        max_relative_error: worst,
        parameters,
    }
}

/// Worst relative error over both task kinds of `arch` for seeds `0..seeds`.
pub fn gradient_check_architecture(arch: ArchitectureId, seeds: u64) -> GradientCheck {
    let mut worst = GradientCheck {
        max_relative_error: 0.0,
        parameters: 0,
    };
    for seed in 0..seeds {
        for kind in [TaskKind::Classification, TaskKind::Regression] {
            let net = desk_network(arch, kind, seed);
            let mut rng = seeded(1000 + seed);
            let (x, t) = random_batch(&net, 6, &mut rng);
            let r = gradient_check(&net, &x, &t, &seeded(2000 + seed));
            worst.max_relative_error = worst.max_relative_error.max(r.max_relative_error);
            worst.parameters += r.parameters;
        }
    }
    worst
}

/// Small, fast experiment on synthetic data.
pub fn quick_spec(arch: ArchitectureId, kind: TaskKind, target: Target) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(arch, kind, target);
    spec.arch = desk_config();
    spec.n_hidden = 2;
    spec.train.epochs = 4;
    spec.train.repetitions = 2;
    spec.train.seed = 11;
    spec
}

pub fn target_for(arch: ArchitectureId) -> Target {
    if arch == ArchitectureId::Double {
        Target::Both
    } else {
        Target::Motor
    }
}

/// Records which rows were read.
pub struct TrackingSource<'a, S: RecordSource> {
    inner: &'a S,
    touched: std::sync::Mutex<std::collections::BTreeSet<usize>>,
}

impl<'a, S: RecordSource> TrackingSource<'a, S> {
    pub fn new(inner: &'a S) -> Self {
        Self {
            inner,
            touched: Default::default(),
        }
    }

    pub fn touched(&self) -> std::collections::BTreeSet<usize> {
        self.touched.lock().unwrap().clone()
    }
}

impl<S: RecordSource> RecordSource for TrackingSource<'_, S> {
    fn len(&self) -> usize {
        self.inner.len()
    }

    fn record(&self, index: usize) -> &Record {
        self.touched.lock().unwrap().insert(index);
        self.inner.record(index)
    }
}

/// Fits `arch` on synthetic data, saves and reloads it, and returns the largest
/// absolute prediction difference over `rows` random raw feature rows.
pub fn checkpoint_round_trip(arch: ArchitectureId, kind: TaskKind, rows: usize) -> f64 {
    let data = updrs_core::dataset::synthetic::generate(8, 10, 21);
    let spec = quick_spec(arch, kind, target_for(arch));
    let train: Vec<usize> = (0..data.len()).collect();
    let model = updrs_core::experiment::fit_model(&data, &train, &spec, 5)
        .unwrap()
        .model;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    updrs_core::checkpoint::save_checkpoint(&model, &path).unwrap();
    let loaded = updrs_core::checkpoint::load_checkpoint(&path).unwrap();

    let mut rng = seeded(77);
    let inputs: Vec<[f64; updrs_core::dataset::FEATURE_COUNT]> = (0..rows)
        .map(|_| {
            let base = &data.records[rng.gen_range(0..data.len())].features;
            std::array::from_fn(|j| base[j] * rng.gen_range(0.8..1.2))
        })
        .collect();
    let before = model.predict_rows(&inputs).unwrap();
    let after = loaded.predict_rows(&inputs).unwrap();
    before
        .iter()
        .flatten()
        .zip(after.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}
