//! Reproduction of the result tables and their text rendering.

use serde::{Deserialize, Serialize};

use super::ablation::{run_ablation, AblationReport};
use super::metrics::RegressionMetrics;
use super::reference::{
    ablation_entry, accuracy_entry, regression_entry, ACCURACY, REGRESSION_ORDER,
};
use super::repetitions::{run_repetitions, EvalReport};
use super::{ExperimentSpec, Target};
use crate::architectures::{ArchitectureId, TaskKind};
use crate::dataset::{RecordSource, Score};
use crate::error::Result;

const MISSING: &str = "-";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tables {
    pub ablation: Vec<AblationReport>,
    /// One report per (architecture, score); the double-task report covers both scores.
    pub classification: Vec<EvalReport>,
    pub regression: Vec<EvalReport>,
}

/// Runs the layer ablation and every architecture on both tasks.
/// `mixed` runs once per score and feeds both the accuracy and regression tables.
pub fn reproduce_tables<S: RecordSource + ?Sized>(
    source: &S,
    base: &ExperimentSpec,
) -> Result<Tables> {
    let run = |architecture, kind, target: Target| -> Result<EvalReport> {
        let spec = ExperimentSpec {
            architecture,
            kind,
            n_hidden: base
                .arch
                .ladder
                .len()
                .clamp(1, crate::architectures::MAX_HIDDEN_LAYERS),
            arch: base.arch.clone(),
            train: super::TrainConfig {
                task: target,
                ..base.train.clone()
            },
        };
        Ok(run_repetitions(source, &spec)?.report)
    };

    let ablation = Score::BOTH
        .iter()
        .map(|&s| run_ablation(source, s, base))
        .collect::<Result<Vec<_>>>()?;

    let mut classification = Vec::new();
    let mut regression = Vec::new();
    for score in Score::BOTH {
        let target = Target::from(score);
        for arch in [
            ArchitectureId::Mlp,
            ArchitectureId::MlpAfterAe,
            ArchitectureId::AeJoint,
        ] {
            classification.push(run(arch, TaskKind::Classification, target)?);
            regression.push(run(arch, TaskKind::Regression, target)?);
        }
        let mixed = run(ArchitectureId::Mixed, TaskKind::Classification, target)?;
        classification.push(mixed.clone());
        regression.push(mixed);
    }
    classification.push(run(
        ArchitectureId::Double,
        TaskKind::Classification,
        Target::Both,
    )?);
    regression.push(run(
        ArchitectureId::Double,
        TaskKind::Regression,
        Target::Both,
    )?);

    Ok(Tables {
        ablation,
        classification,
        regression,
    })
}

impl Tables {
    pub fn ablation_text(&self) -> String {
        render_ablation(&self.ablation)
    }

    pub fn accuracy_text(&self) -> String {
        render_accuracy(&self.classification)
    }

    pub fn regression_text(&self, score: Score) -> String {
        render_regression(score, &self.regression)
    }
}

fn percent(x: Option<f64>) -> String {
    x.map_or_else(|| MISSING.to_string(), |v| format!("{:.2}", 100.0 * v))
}

fn fixed4(x: Option<f64>) -> String {
    x.map_or_else(|| MISSING.to_string(), |v| format!("{v:.4}"))
}

fn regression_cells(m: Option<RegressionMetrics>) -> [String; 3] {
    [
        fixed4(m.map(|m| m.mse)),
        fixed4(m.map(|m| m.rmse)),
        fixed4(m.map(|m| m.mae)),
    ]
}

/// Left-aligned first column, right-aligned numbers, two-space gutters.
pub fn render_table(title: &str, headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = format!("{title}\n");
    out.push_str(&line(headers.to_vec()));
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

pub fn render_ablation(reports: &[AblationReport]) -> String {
    let headers = [
        "Hidden layers",
        "MSE",
        "RMSE",
        "MAE",
        "Accuracy (%)",
        "Reference MSE",
        "Reference RMSE",
        "Reference MAE",
        "Reference Accuracy (%)",
    ];
    let mut out = String::new();
    for report in reports {
        let rows: Vec<Vec<String>> = report
            .rows
            .iter()
            .map(|row| {
                let reg = row
                    .regression
                    .mean
                    .score(report.score)
                    .and_then(|m| m.regression);
                let reference = ablation_entry(report.score, row.n_hidden);
                let mut cells = vec![row.n_hidden.to_string()];
                cells.extend(regression_cells(reg));
                cells.push(percent(row.accuracy()));
                match reference {
                    Some(p) => {
                        cells.extend([p.mse, p.rmse, p.mae, p.accuracy_percent].map(str::to_string))
                    }
                    None => cells.extend(std::iter::repeat_n(MISSING.to_string(), 4)),
                }
                cells
            })
            .collect();
        out.push_str(&render_table(
            &format!("Layer ablation, {} UPDRS", report.score),
            &headers,
            &rows,
        ));
        out.push('\n');
    }
    out
}

fn accuracy_for(reports: &[EvalReport], arch: ArchitectureId, score: Score) -> Option<f64> {
    reports
        .iter()
        .filter(|r| r.architecture_id == arch)
        .find_map(|r| r.mean.score(score).and_then(|m| m.accuracy))
}

pub fn render_accuracy(reports: &[EvalReport]) -> String {
    let headers = [
        "Net",
        "Motor (%)",
        "Total (%)",
        "Average (%)",
        "Reference Motor (%)",
        "Reference Total (%)",
        "Reference Average (%)",
    ];
    let rows: Vec<Vec<String>> = ACCURACY
        .iter()
        .map(|reference| {
            let arch = reference.architecture;
            let motor = accuracy_for(reports, arch, Score::Motor);
            let total = accuracy_for(reports, arch, Score::Total);
            let average = match (motor, total) {
                (Some(m), Some(t)) => Some((m + t) / 2.0),
                _ => None,
            };
            vec![
                arch.classification_label().to_string(),
                percent(motor),
                percent(total),
                percent(average),
                reference.motor_percent.unwrap_or(MISSING).to_string(),
                reference.total_percent.unwrap_or(MISSING).to_string(),
                reference.average_percent.to_string(),
            ]
        })
        .collect();
    render_table("Classification accuracy", &headers, &rows)
}

pub fn render_regression(score: Score, reports: &[EvalReport]) -> String {
    let headers = [
        "Net",
        "MSE",
        "RMSE",
        "MAE",
        "Reference MSE",
        "Reference RMSE",
        "Reference MAE",
    ];
    let rows: Vec<Vec<String>> = REGRESSION_ORDER
        .iter()
        .map(|&arch| {
            let ours = reports
                .iter()
                .filter(|r| r.architecture_id == arch)
                .find_map(|r| r.mean.score(score).and_then(|m| m.regression));
            let mut cells = vec![arch.regression_label().to_string()];
            cells.extend(regression_cells(ours));
            match regression_entry(arch, score) {
                Some(p) => cells.extend([p.mse, p.rmse, p.mae].map(str::to_string)),
                None => cells.extend(std::iter::repeat_n(MISSING.to_string(), 3)),
            }
            cells
        })
        .collect();
    render_table(&format!("Regression, {score} UPDRS"), &headers, &rows)
}

/// Text summary of a single report.
pub fn render_eval_report(report: &EvalReport) -> String {
    let headers = ["Score", "Accuracy (%)", "MSE", "RMSE", "MAE"];
    let row = |m: &super::metrics::ScoreMetrics| {
        let mut cells = vec![m.score.to_string(), percent(m.accuracy)];
        cells.extend(regression_cells(m.regression));
        cells
    };
    let mut rows: Vec<Vec<String>> = report.mean.scores.iter().map(row).collect();
    if let Some(acc) = report.mean.mean_accuracy {
        if report.mean.scores.len() > 1 {
            let mut avg = vec!["average".to_string(), percent(Some(acc))];
            avg.extend(regression_cells(None));
            rows.push(avg);
        }
    }
    let title = format!(
        "{} ({}), {} UPDRS, mean of {} repetition(s), seeds {:?}",
        report.architecture_id,
        report
            .tasks
            .iter()
            .map(|t| t.as_str())
            .collect::<Vec<_>>()
            .join("+"),
        report.target,
        report.repetitions.len(),
        report.seeds()
    );
    let mut out = render_table(&title, &headers, &rows);
    for score in report.target.scores() {
        if let Some(reference) = regression_entry(report.architecture_id, score) {
            if report
                .mean
                .score(score)
                .is_some_and(|m| m.regression.is_some())
            {
                out.push_str(&format!(
                    "reference {score}: MSE {} RMSE {} MAE {}\n",
                    reference.mse, reference.rmse, reference.mae
                ));
            }
        }
    }
    if let Some(reference) = accuracy_entry(report.architecture_id) {
        if report.mean.mean_accuracy.is_some() {
            out.push_str(&format!(
                "reference average accuracy: {}%\n",
                reference.average_percent
            ));
        }
    }
    out
}
