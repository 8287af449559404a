//! Parkinson's telemonitoring records: CSV ingestion, severity labels and
//! descriptive statistics.
//!
//! The canonical file (`parkinsons_updrs.data`) has 22 columns. Nineteen of
//! them are model inputs, in the order of [`FEATURE_COLUMNS`]; `subject#`,
//! `motor_UPDRS` and `total_UPDRS` are carried as metadata and targets.

pub mod reference_stats;
mod stats;
pub mod synthetic;

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use stats::{column_statistics, quantile, FeatureStats};

pub const FEATURE_COUNT: usize = 19;
pub const CANONICAL_RECORD_COUNT: usize = 5875;
pub const CANONICAL_FILE_NAME: &str = "parkinsons_updrs.data";

/// Motor UPDRS strictly above this is severe.
pub const MOTOR_SEVERE_ABOVE: f64 = 20.0;
/// Total UPDRS strictly above this is severe.
pub const TOTAL_SEVERE_ABOVE: f64 = 25.0;

pub const SUBJECT_COLUMN: &str = "subject#";
pub const MOTOR_COLUMN: &str = "motor_UPDRS";
pub const TOTAL_COLUMN: &str = "total_UPDRS";

/// CSV header names of the model inputs, in feature-vector order.
pub const FEATURE_COLUMNS: [&str; FEATURE_COUNT] = [
    "age",
    "sex",
    "test_time",
    "Jitter(%)",
    "Jitter(Abs)",
    "Jitter:RAP",
    "Jitter:PPQ5",
    "Jitter:DDP",
    "Shimmer",
    "Shimmer(dB)",
    "Shimmer:APQ3",
    "Shimmer:APQ5",
    "Shimmer:APQ11",
    "Shimmer:DDA",
    "NHR",
    "HNR",
    "RPDE",
    "DFA",
    "PPE",
];

/// Short labels used in printed statistics tables.
pub const FEATURE_LABELS: [&str; FEATURE_COUNT] = [
    "Age",
    "Sex",
    "Test.time",
    "Jitter%",
    "Jitter(Abs)",
    "RAP",
    "PPQ5",
    "DDP",
    "Shimmer",
    "Shimmer(dB)",
    "APQ3",
    "APQ5",
    "APQ11",
    "DDA",
    "NHR",
    "HNR",
    "RPDE",
    "DFA",
    "PPE",
];

/// All 22 columns in the order of the canonical file.
pub fn canonical_columns() -> Vec<&'static str> {
    let mut cols = vec![SUBJECT_COLUMN];
    cols.extend_from_slice(&FEATURE_COLUMNS[..3]);
    cols.push(MOTOR_COLUMN);
    cols.push(TOTAL_COLUMN);
    cols.extend_from_slice(&FEATURE_COLUMNS[3..]);
    cols
}

/// One voice recording.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub subject_id: u32,
    pub motor_updrs: f64,
    pub total_updrs: f64,
    pub features: [f64; FEATURE_COUNT],
}

impl Record {
    pub fn age(&self) -> f64 {
        self.features[0]
    }

    pub fn sex(&self) -> f64 {
        self.features[1]
    }

    pub fn test_time(&self) -> f64 {
        self.features[2]
    }

    pub fn updrs(&self, score: Score) -> f64 {
        match score {
            Score::Motor => self.motor_updrs,
            Score::Total => self.total_updrs,
        }
    }

    pub fn labels(&self) -> SeverityLabel {
        derive_labels(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Score {
    Motor,
    Total,
}

impl Score {
    pub const BOTH: [Score; 2] = [Score::Motor, Score::Total];

    pub fn as_str(self) -> &'static str {
        match self {
            Score::Motor => "motor",
            Score::Total => "total",
        }
    }

    pub fn severe_above(self) -> f64 {
        match self {
            Score::Motor => MOTOR_SEVERE_ABOVE,
            Score::Total => TOTAL_SEVERE_ABOVE,
        }
    }

    pub fn is_severe(self, updrs: f64) -> bool {
        updrs > self.severe_above()
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Score {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "motor" => Ok(Score::Motor),
            "total" => Ok(Score::Total),
            other => Err(Error::Config(format!(
                "unknown score {other:?} (expected motor or total)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeverityLabel {
    pub motor_severe: bool,
    pub total_severe: bool,
}

impl SeverityLabel {
    pub fn severe(&self, score: Score) -> bool {
        match score {
            Score::Motor => self.motor_severe,
            Score::Total => self.total_severe,
        }
    }
}

/// Severe means strictly above the threshold; the boundary score is non-severe.
pub fn derive_labels(record: &Record) -> SeverityLabel {
    SeverityLabel {
        motor_severe: Score::Motor.is_severe(record.motor_updrs),
        total_severe: Score::Total.is_severe(record.total_updrs),
    }
}

/// Indexed read access to records.
///
/// Experiment code only reads data through this trait, which lets tests wrap
/// a dataset and audit exactly which rows were touched.
pub trait RecordSource: Sync {
    fn len(&self) -> usize;
    fn record(&self, index: usize) -> &Record;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub records: Vec<Record>,
    pub source_path: String,
}

impl RecordSource for Dataset {
    fn len(&self) -> usize {
        self.records.len()
    }

    fn record(&self, index: usize) -> &Record {
        &self.records[index]
    }
}

impl Dataset {
    pub fn new(records: Vec<Record>, source_path: impl Into<String>) -> Self {
        Self {
            records,
            source_path: source_path.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Writes the 22 canonical columns; floats use shortest round-trip formatting.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Config(format!("{other:?}")),
        })?;
        writer.write_record(canonical_columns())?;
        for r in &self.records {
            let mut row = vec![r.subject_id.to_string()];
            row.extend(r.features[..3].iter().map(f64::to_string));
            row.push(r.motor_updrs.to_string());
            row.push(r.total_updrs.to_string());
            row.extend(r.features[3..].iter().map(f64::to_string));
            writer.write_record(&row)?;
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

fn parse_cell(value: &str, row: usize, column: &str) -> Result<f64> {
    let parsed: f64 = value.trim().parse().map_err(|_| Error::Parse {
        row,
        column: column.to_string(),
        value: value.to_string(),
    })?;
    if !parsed.is_finite() {
        return Err(Error::InvalidValue {
            row,
            column: column.to_string(),
            reason: format!("{value:?} is not finite"),
        });
    }
    Ok(parsed)
}

/// Maps header names to column positions and reports every missing or
/// unexpected name in one error.
fn header_index(
    headers: &csv::StringRecord,
    required: &[&str],
    allow_extra: bool,
) -> Result<HashMap<String, usize>> {
    let index: HashMap<String, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim().to_string(), i))
        .collect();
    let missing: Vec<String> = required
        .iter()
        .filter(|c| !index.contains_key(**c))
        .map(|c| c.to_string())
        .collect();
    let extra: Vec<String> = if allow_extra {
        Vec::new()
    } else {
        headers
            .iter()
            .map(str::trim)
            .filter(|h| !required.contains(h))
            .map(str::to_string)
            .collect()
    };
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::HeaderMismatch { missing, extra });
    }
    Ok(index)
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

/// Loads the telemonitoring CSV. Columns are matched by header name, so any
/// column order is accepted, but the header set must be exactly the 22
/// canonical names.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = open_csv(path)?;
    let headers = reader.headers()?.clone();
    if headers.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let columns = canonical_columns();
    let index = header_index(&headers, &columns, false)?;

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let row_no = i + 1;
        let cell = |name: &str| parse_cell(row.get(index[name]).unwrap_or(""), row_no, name);

        let subject = cell(SUBJECT_COLUMN)?;
        if subject.fract() != 0.0 || subject < 0.0 || subject > u32::MAX as f64 {
            return Err(Error::InvalidValue {
                row: row_no,
                column: SUBJECT_COLUMN.into(),
                reason: format!("subject id {subject} is not a non-negative integer"),
            });
        }
        let mut features = [0.0; FEATURE_COUNT];
        for (f, name) in features.iter_mut().zip(FEATURE_COLUMNS) {
            *f = cell(name)?;
        }
        if features[1] != 0.0 && features[1] != 1.0 {
            return Err(Error::InvalidValue {
                row: row_no,
                column: "sex".into(),
                reason: format!("expected 0 or 1, found {}", features[1]),
            });
        }
        records.push(Record {
            subject_id: subject as u32,
            motor_updrs: cell(MOTOR_COLUMN)?,
            total_updrs: cell(TOTAL_COLUMN)?,
            features,
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(Dataset::new(records, path.display().to_string()))
}

/// Reads only the 19 feature columns (other columns are ignored), as used for
/// inference input. A header-only or completely empty file yields no rows.
pub fn load_feature_rows(path: impl AsRef<Path>) -> Result<Vec<[f64; FEATURE_COUNT]>> {
    let path = path.as_ref();
    let mut reader = open_csv(path)?;
    let headers = reader.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers.get(0) == Some("")) {
        return Ok(Vec::new());
    }
    let index = header_index(&headers, &FEATURE_COLUMNS, true)?;
    let mut rows = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let mut features = [0.0; FEATURE_COUNT];
        for (f, name) in features.iter_mut().zip(FEATURE_COLUMNS) {
            *f = parse_cell(row.get(index[name]).unwrap_or(""), i + 1, name)?;
        }
        rows.push(features);
    }
    Ok(rows)
}

/// `--dataset` if given, else `$UPDRS_DATA_DIR/parkinsons_updrs.data`.
pub fn resolve_dataset_path(explicit: Option<&Path>) -> Option<std::path::PathBuf> {
    if let Some(p) = explicit {
        return Some(p.to_path_buf());
    }
    std::env::var_os("UPDRS_DATA_DIR")
        .map(|dir| std::path::PathBuf::from(dir).join(CANONICAL_FILE_NAME))
}
