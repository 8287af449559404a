//! Reference per-feature statistics of the canonical file, and a comparison
//! against freshly computed ones.
//!
//! Entries are kept as printed text because several are given to only two
//! significant figures; the printed precision is part of the check.

use serde::Serialize;

use super::FeatureStats;
use crate::error::{Error, Result};

pub const FIXTURE_CSV: &str = include_str!("../../fixtures/reference_stats.csv");

/// Relative tolerance for every statistic.
pub const RELATIVE_TOLERANCE: f64 = 0.005;

pub const STAT_NAMES: [&str; 6] = ["mean", "std", "q25", "q50", "q75", "max"];

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceValue {
    pub text: String,
    pub value: f64,
    /// One unit in the last printed decimal place; zero for values printed
    /// as integers, which are checked by relative tolerance alone.
    pub resolution: f64,
}

impl ReferenceValue {
    fn parse(text: &str) -> Result<Self> {
        let value: f64 = text
            .parse()
            .map_err(|_| Error::Config(format!("bad fixture value {text:?}")))?;
        let decimals = text.split_once('.').map_or(0, |(_, frac)| frac.len());
        Ok(Self {
            text: text.to_string(),
            value,
            resolution: if decimals == 0 {
                0.0
            } else {
                10f64.powi(-(decimals as i32))
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceRow {
    pub feature: String,
    /// mean, std, q25, q50, q75, max
    pub values: [ReferenceValue; 6],
}

pub fn reference_rows() -> Vec<ReferenceRow> {
    let mut reader = csv::Reader::from_reader(FIXTURE_CSV.as_bytes());
    reader
        .records()
        .map(|row| {
            let row = row.expect("fixture is valid csv");
            let values = std::array::from_fn(|i| {
                ReferenceValue::parse(&row[i + 1]).expect("fixture values are numeric")
            });
            ReferenceRow {
                feature: row[0].to_string(),
                values,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatDeviation {
    pub feature: String,
    pub stat: &'static str,
    pub reference: String,
    pub computed: f64,
    pub relative_deviation: f64,
    pub within_tolerance: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsComparison {
    pub deviations: Vec<StatDeviation>,
    pub max_relative_deviation: f64,
    pub passed: bool,
}

/// A computed value matches a reference one when it is within
/// [`RELATIVE_TOLERANCE`], or when it differs by less than one unit of the
/// last printed digit (so it is consistent with the printed figure).
pub fn value_matches(computed: f64, reference: &ReferenceValue) -> bool {
    let diff = (computed - reference.value).abs();
    diff <= RELATIVE_TOLERANCE * reference.value.abs() || diff < reference.resolution
}

fn relative(computed: f64, expected: f64) -> f64 {
    let diff = (computed - expected).abs();
    if expected == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / expected.abs()
    }
}

pub fn compare(stats: &[FeatureStats]) -> StatsComparison {
    let reference = reference_rows();
    let mut deviations = Vec::new();
    for row in &reference {
        let Some(s) = stats.iter().find(|s| s.feature == row.feature) else {
            for stat in STAT_NAMES {
                deviations.push(StatDeviation {
                    feature: row.feature.clone(),
                    stat,
                    reference: String::new(),
                    computed: f64::NAN,
                    relative_deviation: f64::INFINITY,
                    within_tolerance: false,
                });
            }
            continue;
        };
        let computed = [s.mean, s.std, s.q25, s.q50, s.q75, s.max];
        for ((stat, c), p) in STAT_NAMES.iter().zip(computed).zip(&row.values) {
            deviations.push(StatDeviation {
                feature: row.feature.clone(),
                stat,
                reference: p.text.clone(),
                computed: c,
                relative_deviation: relative(c, p.value),
                within_tolerance: value_matches(c, p),
            });
        }
    }
    let max_relative_deviation = deviations
        .iter()
        .map(|d| d.relative_deviation)
        .fold(0.0, f64::max);
    let passed = deviations.iter().all(|d| d.within_tolerance);
    StatsComparison {
        deviations,
        max_relative_deviation,
        passed,
    }
}
