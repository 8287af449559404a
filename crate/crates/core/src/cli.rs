//! The `updrs` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::architectures::{ArchitectureId, TaskKind};
use crate::checkpoint::{load_checkpoint, save_checkpoint, write_atomic, write_json_atomic};
use crate::dataset::{
    column_statistics, load_dataset, load_feature_rows, reference_stats, resolve_dataset_path,
    Dataset, Score, CANONICAL_RECORD_COUNT,
};
use crate::error::{Error, Result};
use crate::experiment::report::render_eval_report;
use crate::experiment::{
    grid_search, reproduce_tables, run_repetitions, ExperimentSpec, GridBudget, GridSpec, Target,
};
use crate::nn::{Activation, LossKind, OptimizerKind};
use crate::preprocess::{NormalizeOn, SplitBy};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION_FAILURE: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
    pub const RUNTIME_ERROR: i32 = 3;
}

#[derive(Debug, Parser)]
#[command(
    name = "updrs",
    version,
    about = "Parkinson's severity prediction from voice features"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a dataset file and compare its column statistics with the reference statistics.
    Validate {
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Train and evaluate one architecture from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Regenerate the ablation, accuracy and regression tables.
    ReproduceTables {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Apply a checkpoint to a CSV of feature rows.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Output CSV; standard output when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Rank hyper-parameter combinations on a validation slice of the training split.
    GridSearch {
        /// Base experiment; defaults to a motor-score MLP classifier.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        losses: Option<Vec<LossKind>>,
        #[arg(long, value_delimiter = ',')]
        activations: Option<Vec<Activation>>,
        #[arg(long, value_delimiter = ',')]
        batch_sizes: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        learning_rates: Option<Vec<f64>>,
        #[arg(long, default_value_t = GridBudget::default().epochs)]
        grid_epochs: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Flags shared by the training verbs; they override config-file values.
#[derive(Debug, Default, Clone, Args)]
pub struct CommonArgs {
    /// Dataset file; falls back to $UPDRS_DATA_DIR/parkinsons_updrs.data.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Base seed; repetition r uses seed + r.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Rows the feature scaling is fitted on: train or all.
    #[arg(long)]
    pub normalize_on: Option<NormalizeOn>,
    /// Scale UPDRS targets to [0, 1] for training; errors are still reported on the raw scale.
    #[arg(long)]
    pub normalize_targets: bool,
    /// Unit of the 80/20 split: recording or subject.
    #[arg(long)]
    pub split_by: Option<SplitBy>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossWeights {
    #[serde(default = "one")]
    pub classification: f64,
    #[serde(default = "one")]
    pub regression: f64,
    #[serde(default = "one")]
    pub reconstruction: f64,
}

fn one() -> f64 {
    1.0
}

/// On-disk experiment description. Only `architecture` is required.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "config_version")]
    pub schema_version: u32,
    pub dataset: Option<PathBuf>,
    pub architecture: ArchitectureId,
    #[serde(default = "classification")]
    pub kind: TaskKind,
    /// Defaults to `both` for the double-task network and `motor` otherwise.
    pub score: Option<Target>,
    pub n_hidden: Option<usize>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub ae_epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub optimizer: Option<OptimizerKind>,
    pub repetitions: Option<usize>,
    pub normalize_targets: Option<bool>,
    pub normalize_on: Option<NormalizeOn>,
    pub split_by: Option<SplitBy>,
    pub hidden_activation: Option<Activation>,
    pub dropout: Option<f64>,
    pub classification_loss: Option<LossKind>,
    pub loss_weights: Option<LossWeights>,
    pub output_dir: Option<PathBuf>,
}

fn config_version() -> u32 {
    CONFIG_SCHEMA_VERSION
}

fn classification() -> TaskKind {
    TaskKind::Classification
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                Error::Config(inner.to_string())
            } else {
                Error::Config(format!("field `{path}`: {inner}"))
            }
        })?;
        if config.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "field `schema_version`: {} is not supported (expected {CONFIG_SCHEMA_VERSION})",
                config.schema_version
            )));
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn spec(&self) -> ExperimentSpec {
        let default_target = match self.architecture {
            ArchitectureId::Double => Target::Both,
            _ => Target::Motor,
        };
        let mut spec = ExperimentSpec::new(
            self.architecture,
            self.kind,
            self.score.unwrap_or(default_target),
        );
        let t = &mut spec.train;
        set(&mut spec.n_hidden, self.n_hidden);
        set(&mut t.seed, self.seed);
        set(&mut t.epochs, self.epochs);
        t.ae_epochs = self.ae_epochs.or(t.ae_epochs);
        set(&mut t.batch_size, self.batch_size);
        set(&mut t.learning_rate, self.learning_rate);
        set(&mut t.optimizer, self.optimizer);
        set(&mut t.repetitions, self.repetitions);
        set(&mut t.normalize_targets, self.normalize_targets);
        set(&mut t.normalize_on, self.normalize_on);
        set(&mut t.split_by, self.split_by);
        let a = &mut spec.arch;
        set(&mut a.hidden_activation, self.hidden_activation);
        set(&mut a.dropout, self.dropout);
        set(&mut a.classification_loss, self.classification_loss);
        if let Some(w) = &self.loss_weights {
            a.classification_weight = w.classification;
            a.regression_weight = w.regression;
            a.reconstruction_weight = w.reconstruction;
        }
        spec
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl CommonArgs {
    pub fn apply(&self, spec: &mut ExperimentSpec) {
        let t = &mut spec.train;
        set(&mut t.seed, self.seed);
        set(&mut t.epochs, self.epochs);
        set(&mut t.batch_size, self.batch_size);
        set(&mut t.learning_rate, self.lr);
        set(&mut t.repetitions, self.repetitions);
        set(&mut t.normalize_on, self.normalize_on);
        set(&mut t.split_by, self.split_by);
        if self.normalize_targets {
            t.normalize_targets = true;
        }
    }
}

/// Everything needed to rerun an experiment. Timestamps live only here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub software_version: String,
    pub dataset: PathBuf,
    pub spec: ExperimentSpec,
    pub seeds: Vec<u64>,
    pub started_unix_seconds: u64,
    pub duration_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Maps an error to the process exit status.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::UnknownArchitecture { .. }
        | Error::FileNotFound(_)
        | Error::Checkpoint(_)
        | Error::MissingEncoder(_)
        | Error::EmptyGrid => exit::CONFIG_ERROR,
        Error::HeaderMismatch { .. }
        | Error::Parse { .. }
        | Error::InvalidValue { .. }
        | Error::EmptyDataset
        | Error::Csv(_) => exit::VALIDATION_FAILURE,
        Error::Repetition { source, .. } => exit_code(source),
        _ => exit::RUNTIME_ERROR,
    }
}

fn dataset_path(explicit: Option<&Path>) -> Result<PathBuf> {
    resolve_dataset_path(explicit).ok_or_else(|| {
        Error::Config("no dataset given: pass --dataset or set UPDRS_DATA_DIR".into())
    })
}

fn out_dir(common: &CommonArgs, fallback: Option<&Path>, default: &str) -> Result<PathBuf> {
    let dir = common
        .out
        .clone()
        .or_else(|| fallback.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from(default));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

/// Parses `args` (including the program name), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::CONFIG_ERROR
            } else {
                exit::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Validate { dataset } => cmd_validate(&dataset_path(dataset.as_deref())?),
        Command::Run { config, common } => cmd_run(&config, &common),
        Command::ReproduceTables { common } => cmd_reproduce_tables(&common),
        Command::Predict {
            checkpoint,
            input,
            output,
        } => cmd_predict(&checkpoint, &input, output.as_deref()),
        Command::GridSearch {
            config,
            losses,
            activations,
            batch_sizes,
            learning_rates,
            grid_epochs,
            common,
        } => {
            let defaults = GridSpec::default();
            let grid = GridSpec {
                losses: losses.unwrap_or(defaults.losses),
                activations: activations.unwrap_or(defaults.activations),
                batch_sizes: batch_sizes.unwrap_or(defaults.batch_sizes),
                learning_rates: learning_rates.unwrap_or(defaults.learning_rates),
            };
            let budget = GridBudget {
                epochs: grid_epochs,
                ..GridBudget::default()
            };
            cmd_grid_search(config.as_deref(), &grid, &budget, &common)
        }
    }
}

pub fn cmd_validate(path: &Path) -> Result<i32> {
    let dataset = load_dataset(path)?;
    let stats = column_statistics(&dataset)?;
    let comparison = reference_stats::compare(&stats);
    println!(
        "{:<14} {:<5} {:>14} {:>16} {:>10}  ok",
        "feature", "stat", "reference", "computed", "rel.dev"
    );
    for d in &comparison.deviations {
        println!(
            "{:<14} {:<5} {:>14} {:>16.6} {:>9.4}%  {}",
            d.feature,
            d.stat,
            d.reference,
            d.computed,
            100.0 * d.relative_deviation,
            if d.within_tolerance { "yes" } else { "NO" }
        );
    }
    println!(
        "max relative deviation: {:.4}%",
        100.0 * comparison.max_relative_deviation
    );
    let count_ok = dataset.len() == CANONICAL_RECORD_COUNT;
    println!(
        "records: {} (expected {CANONICAL_RECORD_COUNT}){}",
        dataset.len(),
        if count_ok { "" } else { "  count mismatch" }
    );
    if count_ok && comparison.passed {
        println!("validation passed");
        Ok(exit::SUCCESS)
    } else {
        println!("validation failed");
        Ok(exit::VALIDATION_FAILURE)
    }
}

fn load_for(common: &CommonArgs, config_dataset: Option<&Path>) -> Result<Dataset> {
    let path = dataset_path(common.dataset.as_deref().or(config_dataset))?;
    load_dataset(path)
}

pub fn cmd_run(config_path: &Path, common: &CommonArgs) -> Result<i32> {
    let started = Instant::now();
    let started_unix_seconds = unix_now();
    let config = ExperimentConfig::load(config_path)?;
    let mut spec = config.spec();
    common.apply(&mut spec);
    spec.validate()?;
    let dataset = load_for(common, config.dataset.as_deref())?;
    let dir = out_dir(common, config.output_dir.as_deref(), "updrs-run")?;

    let outcome = run_repetitions(&dataset, &spec)?;
    let report_json = dir.join("report.json");
    let report_txt = dir.join("report.txt");
    let checkpoint = dir.join("checkpoint.json");
    let normalization = dir.join("normalization.json");
    write_json_atomic(&report_json, &outcome.report)?;
    let text = render_eval_report(&outcome.report);
    write_atomic(&report_txt, text.as_bytes())?;
    save_checkpoint(&outcome.best, &checkpoint)?;
    write_json_atomic(&normalization, &outcome.best.normalization)?;
    print!("{text}");

    let manifest = RunManifest {
        command: "run".into(),
        software_version: env!("CARGO_PKG_VERSION").into(),
        dataset: PathBuf::from(&dataset.source_path),
        seeds: outcome.report.seeds(),
        spec,
        started_unix_seconds,
        duration_seconds: started.elapsed().as_secs_f64(),
        outputs: vec![report_json, report_txt, checkpoint, normalization],
    };
    write_json_atomic(dir.join("manifest.json"), &manifest)?;
    Ok(exit::SUCCESS)
}

pub fn cmd_reproduce_tables(common: &CommonArgs) -> Result<i32> {
    let started = Instant::now();
    let started_unix_seconds = unix_now();
    let mut base =
        ExperimentSpec::new(ArchitectureId::Mlp, TaskKind::Classification, Target::Motor);
    common.apply(&mut base);
    base.validate()?;
    let dataset = load_for(common, None)?;
    let dir = out_dir(common, None, "updrs-tables")?;

    let tables = reproduce_tables(&dataset, &base)?;
    let files = [
        ("ablation.txt", tables.ablation_text()),
        ("accuracy.txt", tables.accuracy_text()),
        ("regression_motor.txt", tables.regression_text(Score::Motor)),
        ("regression_total.txt", tables.regression_text(Score::Total)),
    ];
    let mut outputs = Vec::new();
    for (name, text) in &files {
        let path = dir.join(name);
        write_atomic(&path, text.as_bytes())?;
        println!("{text}");
        outputs.push(path);
    }
    let json = dir.join("tables.json");
    write_json_atomic(&json, &tables)?;
    outputs.push(json);

    let seeds = (1..=base.train.repetitions as u64)
        .map(|r| base.train.seed.wrapping_add(r))
        .collect();
    let manifest = RunManifest {
        command: "reproduce-tables".into(),
        software_version: env!("CARGO_PKG_VERSION").into(),
        dataset: PathBuf::from(&dataset.source_path),
        spec: base,
        seeds,
        started_unix_seconds,
        duration_seconds: started.elapsed().as_secs_f64(),
        outputs,
    };
    write_json_atomic(dir.join("manifest.json"), &manifest)?;
    Ok(exit::SUCCESS)
}

/// Writes predictions as CSV; an input without rows yields an empty file.
pub fn cmd_predict(checkpoint: &Path, input: &Path, output: Option<&Path>) -> Result<i32> {
    let model = load_checkpoint(checkpoint)?;
    let rows = load_feature_rows(input)?;
    let predictions = model.predict_rows(&rows)?;
    let mut buf = Vec::new();
    if !predictions.is_empty() {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(model.output_columns())?;
        for row in &predictions {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()
            .map_err(|e| Error::io(output.unwrap_or(Path::new("<stdout>")), e))?;
    }
    match output {
        Some(path) => write_atomic(path, &buf)?,
        None => print!("{}", String::from_utf8_lossy(&buf)),
    }
    Ok(exit::SUCCESS)
}

pub fn cmd_grid_search(
    config: Option<&Path>,
    grid: &GridSpec,
    budget: &GridBudget,
    common: &CommonArgs,
) -> Result<i32> {
    let config = config.map(ExperimentConfig::load).transpose()?;
    let mut base = match &config {
        Some(c) => c.spec(),
        None => ExperimentSpec::new(ArchitectureId::Mlp, TaskKind::Classification, Target::Motor),
    };
    common.apply(&mut base);
    base.validate()?;
    let dataset = load_for(common, config.as_ref().and_then(|c| c.dataset.as_deref()))?;
    let dir = out_dir(
        common,
        config.as_ref().and_then(|c| c.output_dir.as_deref()),
        "updrs-grid",
    )?;

    let results = grid_search(&dataset, grid, &base, budget)?;
    let headers = [
        "Rank",
        "Loss",
        "Activation",
        "Batch",
        "LR",
        "Val. accuracy (%)",
        "Val. MSE",
    ];
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.rank.to_string(),
                r.point.loss.to_string(),
                r.point.activation.to_string(),
                r.point.batch_size.to_string(),
                r.point.learning_rate.to_string(),
                r.validation
                    .mean_accuracy
                    .map_or_else(|| "-".into(), |a| format!("{:.2}", 100.0 * a)),
                r.validation
                    .mean_mse()
                    .map_or_else(|| "-".into(), |m| format!("{m:.4}")),
            ]
        })
        .collect();
    let text = crate::experiment::report::render_table(
        &format!("Grid search, {} epochs per point", budget.epochs),
        &headers,
        &rows,
    );
    write_atomic(dir.join("grid.txt"), text.as_bytes())?;
    write_json_atomic(dir.join("grid.json"), &results)?;
    print!("{text}");
    Ok(exit::SUCCESS)
}
