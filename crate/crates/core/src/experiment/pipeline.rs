use serde::{Deserialize, Serialize};

use super::metrics::{evaluate_classification, evaluate_regression, Metrics, ScoreMetrics};
use super::train::{train, train_with_monitor};
use super::{ExperimentSpec, Target};
use crate::architectures::{
    build_double_task_with, build_joint_ae_head_with, build_mixed_with, build_mlp_after_ae_with,
    build_mlp_with, ArchitectureId, TaskKind,
};
use crate::dataset::{Record, RecordSource, Score, FEATURE_COUNT};
use crate::error::{Error, Result};
use crate::nn::rng::{self, Stream};
use crate::nn::{mse_loss, HeadKind, Matrix, Network};
use crate::preprocess::{fit_normalizer, split, NormalizationParams, NormalizeOn, TargetScaler};

/// What a network head is trained to produce.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum HeadRole {
    Reconstruction,
    Task { kind: TaskKind, scores: Vec<Score> },
}

/// Head roles in network head order.
pub fn head_roles(architecture: ArchitectureId, kind: TaskKind, target: Target) -> Vec<HeadRole> {
    let scores = target.scores();
    let task = |kind| HeadRole::Task {
        kind,
        scores: scores.clone(),
    };
    match architecture {
        ArchitectureId::Mlp | ArchitectureId::MlpAfterAe | ArchitectureId::Double => {
            vec![task(kind)]
        }
        ArchitectureId::AeJoint => vec![HeadRole::Reconstruction, task(kind)],
        ArchitectureId::Mixed => vec![task(TaskKind::Classification), task(TaskKind::Regression)],
    }
}

/// A fitted network together with everything needed to apply it to raw features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub architecture: ArchitectureId,
    pub kind: TaskKind,
    pub target: Target,
    pub seed: u64,
    /// Frozen autoencoder whose trunk feeds `network`.
    pub encoder: Option<Network>,
    pub network: Network,
    pub normalization: NormalizationParams,
    pub target_scaler: Option<TargetScaler>,
}

#[derive(Clone, Debug)]
pub struct FitOutcome {
    pub model: TrainedModel,
    pub loss_trace: Vec<f64>,
    pub encoder_loss_trace: Option<Vec<f64>>,
}

impl TrainedModel {
    pub fn roles(&self) -> Vec<HeadRole> {
        head_roles(self.architecture, self.kind, self.target)
    }

    /// Checks that the stored networks fit the declared architecture and task.
    pub fn check_consistent(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Checkpoint(msg));
        let roles = self.roles();
        if roles.len() != self.network.head_count() {
            return fail(format!(
                "`{}` expects {} head(s), network has {}",
                self.architecture,
                roles.len(),
                self.network.head_count()
            ));
        }
        for (h, role) in roles.iter().enumerate() {
            let head = &self.network.spec().heads[h];
            let ok = match role {
                HeadRole::Reconstruction => head.kind == HeadKind::Reconstruction,
                HeadRole::Task { kind, scores } => {
                    let expected = match kind {
                        TaskKind::Classification => HeadKind::Classification,
                        TaskKind::Regression => HeadKind::Regression,
                    };
                    head.kind == expected && head.out_dim == scores.len()
                }
            };
            if !ok {
                return fail(format!("head {h} does not match role {role:?}"));
            }
        }
        let expected_input = match (&self.encoder, self.architecture.needs_pretrained_encoder()) {
            (Some(enc), true) => {
                if enc.input_dim() != FEATURE_COUNT {
                    return fail(format!(
                        "encoder takes {} inputs, expected {FEATURE_COUNT}",
                        enc.input_dim()
                    ));
                }
                enc.spec().trunk_output_dim()
            }
            (None, false) => FEATURE_COUNT,
            (None, true) => return Err(Error::MissingEncoder(self.architecture.to_string())),
            (Some(_), false) => {
                return fail(format!("`{}` does not use an encoder", self.architecture))
            }
        };
        if self.network.input_dim() != expected_input {
            return fail(format!(
                "network takes {} inputs, expected {expected_input}",
                self.network.input_dim()
            ));
        }
        Ok(())
    }

    /// Network inputs for raw feature rows: normalized, then encoded if needed.
    pub fn inputs<'a>(
        &self,
        rows: impl IntoIterator<Item = &'a [f64; FEATURE_COUNT]>,
    ) -> Result<Matrix> {
        let normalized = normalized_matrix(&self.normalization, rows)?;
        match &self.encoder {
            Some(encoder) => encoder.encode(&normalized),
            None => Ok(normalized),
        }
    }

    /// Head outputs with regression values mapped back to the UPDRS scale.
    pub fn predict_heads<'a>(
        &self,
        rows: impl IntoIterator<Item = &'a [f64; FEATURE_COUNT]>,
    ) -> Result<Vec<Matrix>> {
        let inputs = self.inputs(rows)?;
        let mut outputs = self.network.predict(&inputs)?;
        if let Some(scaler) = &self.target_scaler {
            for (out, role) in outputs.iter_mut().zip(self.roles()) {
                if let HeadRole::Task {
                    kind: TaskKind::Regression,
                    scores,
                } = role
                {
                    for r in 0..out.rows() {
                        for (c, score) in scores.iter().enumerate() {
                            let v = scaler.range(*score).unscale(out.get(r, c));
                            out.set(r, c, v);
                        }
                    }
                }
            }
        }
        Ok(outputs)
    }

    /// Names of the values produced by [`TrainedModel::predict_rows`].
    pub fn output_columns(&self) -> Vec<String> {
        let mut columns = Vec::new();
        for role in self.roles() {
            if let HeadRole::Task { kind, scores } = role {
                for score in scores {
                    match kind {
                        TaskKind::Classification => {
                            columns.push(format!("{score}_severe_probability"));
                            columns.push(format!("{score}_severe"));
                        }
                        TaskKind::Regression => columns.push(format!("{score}_updrs")),
                    }
                }
            }
        }
        columns
    }

    /// One row of task outputs per input row; classification heads contribute
    /// a probability and a 0/1 label.
    pub fn predict_rows(&self, rows: &[[f64; FEATURE_COUNT]]) -> Result<Vec<Vec<f64>>> {
        if rows.is_empty() {
            return Ok(Vec::new());
        }
        let heads = self.predict_heads(rows)?;
        let roles = self.roles();
        Ok((0..rows.len())
            .map(|r| {
                let mut values = Vec::new();
                for (out, role) in heads.iter().zip(&roles) {
                    if let HeadRole::Task { kind, scores } = role {
                        for c in 0..scores.len() {
                            let v = out.get(r, c);
                            values.push(v);
                            if *kind == TaskKind::Classification {
                                values.push(f64::from(u8::from(
                                    v > super::metrics::DECISION_THRESHOLD,
                                )));
                            }
                        }
                    }
                }
                values
            })
            .collect())
    }
}

fn normalized_matrix<'a>(
    params: &NormalizationParams,
    rows: impl IntoIterator<Item = &'a [f64; FEATURE_COUNT]>,
) -> Result<Matrix> {
    let data: Vec<f64> = rows.into_iter().flat_map(|f| params.apply(f)).collect();
    Matrix::from_vec(data.len() / FEATURE_COUNT, FEATURE_COUNT, data)
}

fn head_targets(
    roles: &[HeadRole],
    records: &[&Record],
    inputs: &Matrix,
    scaler: Option<&TargetScaler>,
) -> Result<Vec<Matrix>> {
    roles
        .iter()
        .map(|role| match role {
            HeadRole::Reconstruction => Ok(inputs.clone()),
            HeadRole::Task { kind, scores } => {
                let data = records
                    .iter()
                    .flat_map(|r| {
                        scores.iter().map(move |&s| match kind {
                            TaskKind::Classification => f64::from(u8::from(r.labels().severe(s))),
                            TaskKind::Regression => match scaler {
                                Some(sc) => sc.range(s).scale(r.updrs(s)),
                                None => r.updrs(s),
                            },
                        })
                    })
                    .collect();
                Matrix::from_vec(records.len(), scores.len(), data)
            }
        })
        .collect()
}

/// Fits normalization, the optional autoencoder stage and the task network on
/// the given training rows. Nothing outside `train_indices` is read unless
/// normalization is configured to use the whole dataset.
pub fn fit_model<S: RecordSource + ?Sized>(
    source: &S,
    train_indices: &[usize],
    spec: &ExperimentSpec,
    seed: u64,
) -> Result<FitOutcome> {
    spec.validate()?;
    if train_indices.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let records: Vec<&Record> = train_indices.iter().map(|&i| source.record(i)).collect();
    let normalization = match spec.train.normalize_on {
        NormalizeOn::Train => fit_normalizer(records.iter().copied())?,
        NormalizeOn::All => fit_normalizer((0..source.len()).map(|i| source.record(i)))?,
    };
    let target_scaler = if spec.train.normalize_targets {
        Some(TargetScaler::fit(records.iter().copied())?)
    } else {
        None
    };
    let normalized = normalized_matrix(&normalization, records.iter().map(|r| &r.features))?;

    let (encoder, encoder_loss_trace, inputs) = if spec.architecture.needs_pretrained_encoder() {
        let mut ae = Network::new(
            spec.arch.autoencoder().network_spec()?,
            &mut rng::stream(seed, Stream::AutoencoderInit),
        )?;
        let trace = train(
            &mut ae,
            &normalized,
            std::slice::from_ref(&normalized),
            &spec.train.autoencoder_options(),
            &mut rng::stream(seed, Stream::AutoencoderShuffle),
            &mut rng::stream(seed, Stream::AutoencoderDropout),
        )?;
        let latent = ae.encode(&normalized)?;
        (Some(ae), Some(trace), latent)
    } else {
        (None, None, normalized.clone())
    };

    let kind = spec.kind;
    let network_spec = match (spec.architecture, &encoder) {
        (ArchitectureId::Mlp, _) => build_mlp_with(&spec.arch, kind, spec.n_hidden)?,
        (ArchitectureId::AeJoint, _) => build_joint_ae_head_with(&spec.arch, kind)?,
        (ArchitectureId::Double, _) => build_double_task_with(&spec.arch, kind)?,
        (ArchitectureId::MlpAfterAe, Some(enc)) => build_mlp_after_ae_with(&spec.arch, kind, enc)?,
        (ArchitectureId::Mixed, Some(enc)) => build_mixed_with(&spec.arch, enc)?,
        (a, None) => return Err(Error::MissingEncoder(a.to_string())),
    };
    let mut network = Network::new(network_spec, &mut rng::stream(seed, Stream::Init))?;
    let roles = head_roles(spec.architecture, kind, spec.target());
    let targets = head_targets(&roles, &records, &inputs, target_scaler.as_ref())?;
    let loss_trace = train(
        &mut network,
        &inputs,
        &targets,
        &spec.train.options(),
        &mut rng::stream(seed, Stream::Shuffle),
        &mut rng::stream(seed, Stream::Dropout),
    )?;

    Ok(FitOutcome {
        model: TrainedModel {
            architecture: spec.architecture,
            kind,
            target: spec.target(),
            seed,
            encoder,
            network,
            normalization,
            target_scaler,
        },
        loss_trace,
        encoder_loss_trace,
    })
}

/// Accuracy and raw-scale regression errors on the given rows.
pub fn evaluate_model<S: RecordSource + ?Sized>(
    model: &TrainedModel,
    source: &S,
    indices: &[usize],
) -> Result<Metrics> {
    if indices.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let records: Vec<&Record> = indices.iter().map(|&i| source.record(i)).collect();
    let outputs = model.predict_heads(records.iter().map(|r| &r.features))?;
    let mut per_score: Vec<ScoreMetrics> = model
        .target
        .scores()
        .into_iter()
        .map(ScoreMetrics::empty)
        .collect();
    for (out, role) in outputs.iter().zip(model.roles()) {
        let HeadRole::Task { kind, scores } = role else {
            continue;
        };
        for (c, score) in scores.iter().enumerate() {
            let predicted = out.column(c);
            let entry = per_score
                .iter_mut()
                .find(|m| m.score == *score)
                .expect("head scores come from the model target");
            match kind {
                TaskKind::Classification => {
                    let labels: Vec<bool> =
                        records.iter().map(|r| r.labels().severe(*score)).collect();
                    entry.accuracy = Some(evaluate_classification(&predicted, &labels)?);
                }
                TaskKind::Regression => {
                    let truth: Vec<f64> = records.iter().map(|r| r.updrs(*score)).collect();
                    entry.regression = Some(evaluate_regression(&predicted, &truth)?);
                }
            }
        }
    }
    Ok(Metrics::new(per_score))
}

/// Held-out reconstruction error of the stand-alone autoencoder over training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderStudy {
    pub seed: u64,
    pub latent_width: usize,
    /// Test reconstruction MSE after each epoch, on normalized features.
    pub test_mse: Vec<f64>,
}

impl AutoencoderStudy {
    pub fn first_epoch_mse(&self) -> f64 {
        self.test_mse[0]
    }

    pub fn final_mse(&self) -> f64 {
        *self.test_mse.last().expect("at least one epoch")
    }
}

/// Trains the stand-alone autoencoder on the training split of `seed` and
/// records its reconstruction MSE on the test split after every epoch.
pub fn autoencoder_study<S: RecordSource + ?Sized>(
    source: &S,
    spec: &ExperimentSpec,
    seed: u64,
) -> Result<AutoencoderStudy> {
    spec.train.validate()?;
    let split = split(source, seed, spec.train.split_by);
    if split.test_indices.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let train_records: Vec<&Record> = split
        .train_indices
        .iter()
        .map(|&i| source.record(i))
        .collect();
    let normalization = fit_normalizer(train_records.iter().copied())?;
    let x_train = normalized_matrix(&normalization, train_records.iter().map(|r| &r.features))?;
    let x_test = normalized_matrix(
        &normalization,
        split
            .test_indices
            .iter()
            .map(|&i| &source.record(i).features),
    )?;
    let ae_spec = spec.arch.autoencoder().network_spec()?;
    let latent_width = ae_spec.trunk_output_dim();
    let mut ae = Network::new(ae_spec, &mut rng::stream(seed, Stream::AutoencoderInit))?;
    let mut test_mse = Vec::new();
    train_with_monitor(
        &mut ae,
        &x_train,
        std::slice::from_ref(&x_train),
        &spec.train.autoencoder_options(),
        &mut rng::stream(seed, Stream::AutoencoderShuffle),
        &mut rng::stream(seed, Stream::AutoencoderDropout),
        |_, net| {
            let recon = net.predict(&x_test)?.remove(0);
            test_mse.push(mse_loss(recon.data(), x_test.data())?);
            Ok(())
        },
    )?;
    Ok(AutoencoderStudy {
        seed,
        latent_width,
        test_mse,
    })
}
