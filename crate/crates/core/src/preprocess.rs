//! Min-max feature scaling and the train/test split protocol.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{Record, RecordSource, Score, FEATURE_COLUMNS, FEATURE_COUNT};
use crate::error::{Error, Result};
use crate::nn::rng::{self, Stream};

pub const TRAIN_FRACTION: f64 = 0.8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

impl FeatureRange {
    /// `(x − min)/(max − min)`, or 0 for a constant feature. Values outside
    /// the fitted range are not clipped.
    pub fn scale(&self, x: f64) -> f64 {
        let span = self.max - self.min;
        if span > 0.0 {
            (x - self.min) / span
        } else {
            0.0
        }
    }

    pub fn unscale(&self, y: f64) -> f64 {
        self.min + y * (self.max - self.min)
    }

    fn extend(range: &mut Option<Self>, x: f64) {
        *range = Some(match *range {
            None => FeatureRange { min: x, max: x },
            Some(r) => FeatureRange {
                min: r.min.min(x),
                max: r.max.max(x),
            },
        });
    }
}

/// Per-feature extrema. Serialized as a JSON object keyed by the CSV column name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "BTreeMap<String, FeatureRange>",
    into = "BTreeMap<String, FeatureRange>"
)]
pub struct NormalizationParams {
    ranges: [FeatureRange; FEATURE_COUNT],
}

impl From<NormalizationParams> for BTreeMap<String, FeatureRange> {
    fn from(p: NormalizationParams) -> Self {
        FEATURE_COLUMNS
            .iter()
            .zip(p.ranges)
            .map(|(n, r)| (n.to_string(), r))
            .collect()
    }
}

impl TryFrom<BTreeMap<String, FeatureRange>> for NormalizationParams {
    type Error = Error;

    fn try_from(mut map: BTreeMap<String, FeatureRange>) -> Result<Self> {
        let mut ranges = [FeatureRange { min: 0.0, max: 0.0 }; FEATURE_COUNT];
        for (r, name) in ranges.iter_mut().zip(FEATURE_COLUMNS) {
            *r = map
                .remove(name)
                .ok_or_else(|| Error::Checkpoint(format!("normalization is missing `{name}`")))?;
            if !(r.min.is_finite() && r.max.is_finite() && r.max >= r.min) {
                return Err(Error::Checkpoint(format!(
                    "normalization range for `{name}` is invalid"
                )));
            }
        }
        if let Some(extra) = map.keys().next() {
            return Err(Error::Checkpoint(format!(
                "normalization has unknown feature `{extra}`"
            )));
        }
        Ok(Self { ranges })
    }
}

impl NormalizationParams {
    pub fn ranges(&self) -> &[FeatureRange; FEATURE_COUNT] {
        &self.ranges
    }

    pub fn apply(&self, features: &[f64; FEATURE_COUNT]) -> [f64; FEATURE_COUNT] {
        std::array::from_fn(|j| self.ranges[j].scale(features[j]))
    }
}

/// Min and max of every feature over the given records.
pub fn fit_normalizer<'a>(
    records: impl IntoIterator<Item = &'a Record>,
) -> Result<NormalizationParams> {
    let mut ranges: [Option<FeatureRange>; FEATURE_COUNT] = [None; FEATURE_COUNT];
    for r in records {
        for (slot, &x) in ranges.iter_mut().zip(&r.features) {
            FeatureRange::extend(slot, x);
        }
    }
    if ranges[0].is_none() {
        return Err(Error::EmptyDataset);
    }
    Ok(NormalizationParams {
        ranges: ranges.map(|r| r.expect("all features seen together")),
    })
}

pub fn apply_normalizer(params: &NormalizationParams, record: &Record) -> [f64; FEATURE_COUNT] {
    params.apply(&record.features)
}

/// Which records the normalizer is fitted on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeOn {
    #[default]
    Train,
    All,
}

impl FromStr for NormalizeOn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(NormalizeOn::Train),
            "all" => Ok(NormalizeOn::All),
            other => Err(Error::Config(format!(
                "unknown normalize-on value {other:?} (expected train or all)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitBy {
    /// Rows are shuffled individually; one subject's recordings can land on both sides.
    #[default]
    Recording,
    /// Whole subjects are assigned to one side.
    Subject,
}

impl FromStr for SplitBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recording" => Ok(SplitBy::Recording),
            "subject" => Ok(SplitBy::Subject),
            other => Err(Error::Config(format!(
                "unknown split-by value {other:?} (expected recording or subject)"
            ))),
        }
    }
}

impl fmt::Display for SplitBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitBy::Recording => "recording",
            SplitBy::Subject => "subject",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
}

/// Seeded permutation of `0..n`; the first `⌊0.8·n⌋` indices train, the rest test.
pub fn split_80_20(n: usize, seed: u64) -> Split {
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng::stream(seed, Stream::Split));
    let cut = (n as f64 * TRAIN_FRACTION).floor() as usize;
    let test_indices = indices.split_off(cut);
    Split {
        train_indices: indices,
        test_indices,
        seed,
    }
}

/// Subject-level variant: subjects are permuted and the first `⌊0.8·S⌋`
/// subjects go to training.
pub fn split_by_subject<S: RecordSource + ?Sized>(source: &S, seed: u64) -> Split {
    let mut subjects: Vec<u32> = (0..source.len())
        .map(|i| source.record(i).subject_id)
        .collect();
    subjects.sort_unstable();
    subjects.dedup();
    subjects.shuffle(&mut rng::stream(seed, Stream::Split));
    let cut = (subjects.len() as f64 * TRAIN_FRACTION).floor() as usize;
    let train_subjects: std::collections::HashSet<u32> = subjects[..cut].iter().copied().collect();
    let (train_indices, test_indices) =
        (0..source.len()).partition(|&i| train_subjects.contains(&source.record(i).subject_id));
    Split {
        train_indices,
        test_indices,
        seed,
    }
}

pub fn split<S: RecordSource + ?Sized>(source: &S, seed: u64, by: SplitBy) -> Split {
    match by {
        SplitBy::Recording => split_80_20(source.len(), seed),
        SplitBy::Subject => split_by_subject(source, seed),
    }
}

/// Moves a seeded `fraction` of `train` into a validation set.
pub fn carve_validation(train: &[usize], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut shuffled = train.to_vec();
    shuffled.shuffle(&mut rng::stream(seed, Stream::Validation));
    let n_val = ((train.len() as f64) * fraction).round() as usize;
    let n_val = n_val.clamp(usize::from(train.len() > 1), train.len().saturating_sub(1));
    let validation = shuffled.split_off(train.len() - n_val);
    (shuffled, validation)
}

/// Min-max scaling of UPDRS targets, fitted on training records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetScaler {
    pub motor: FeatureRange,
    pub total: FeatureRange,
}

impl TargetScaler {
    pub fn fit<'a>(records: impl IntoIterator<Item = &'a Record>) -> Result<Self> {
        let (mut motor, mut total) = (None::<FeatureRange>, None::<FeatureRange>);
        for r in records {
            FeatureRange::extend(&mut motor, r.motor_updrs);
            FeatureRange::extend(&mut total, r.total_updrs);
        }
        match (motor, total) {
            (Some(motor), Some(total)) => Ok(Self { motor, total }),
            _ => Err(Error::EmptyDataset),
        }
    }

    pub fn range(&self, score: Score) -> &FeatureRange {
        match score {
            Score::Motor => &self.motor,
            Score::Total => &self.total,
        }
    }
}
