//! Reference results shown beside reproduced ones. Values are kept as printed.

use crate::architectures::ArchitectureId;
use crate::dataset::Score;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AblationEntry {
    pub score: Score,
    pub n_hidden: usize,
    pub mse: &'static str,
    pub rmse: &'static str,
    pub mae: &'static str,
    pub accuracy_percent: &'static str,
}

const fn ablation(
    score: Score,
    n_hidden: usize,
    mse: &'static str,
    rmse: &'static str,
    mae: &'static str,
    accuracy_percent: &'static str,
) -> AblationEntry {
    AblationEntry {
        score,
        n_hidden,
        mse,
        rmse,
        mae,
        accuracy_percent,
    }
}

pub const ABLATION: [AblationEntry; 10] = [
    ablation(Score::Motor, 1, "519.2614", "22.7873079", "21.29", "87.94"),
    ablation(Score::Motor, 2, "5.5454", "2.3548673", "1.6048", "96.51"),
    ablation(Score::Motor, 3, "4.3517", "2.08607287", "1.3244", "96.68"),
    ablation(Score::Motor, 4, "1.9603", "1.40010714", "0.8263", "98.38"),
    ablation(Score::Motor, 5, "3.4661", "1.86174649", "1.1328", "95.91"),
    ablation(Score::Total, 1, "50.0422", "7.07405117", "5.4907", "86.81"),
    ablation(Score::Total, 2, "6.8737", "2.62177421", "1.8628", "95.23"),
    ablation(Score::Total, 3, "8.1247", "2.85038594", "1.9226", "97.79"),
    ablation(Score::Total, 4, "4.1276", "2.03164958", "1.2739", "98.47"),
    ablation(Score::Total, 5, "5.7784", "2.40383028", "1.5774", "97.96"),
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AccuracyEntry {
    pub architecture: ArchitectureId,
    pub motor_percent: Option<&'static str>,
    pub total_percent: Option<&'static str>,
    pub average_percent: &'static str,
}

/// Classification rows in reference order.
pub const ACCURACY: [AccuracyEntry; 5] = [
    AccuracyEntry {
        architecture: ArchitectureId::Mlp,
        motor_percent: Some("98.38"),
        total_percent: Some("98.47"),
        average_percent: "98.43",
    },
    AccuracyEntry {
        architecture: ArchitectureId::MlpAfterAe,
        motor_percent: Some("99.15"),
        total_percent: Some("98.89"),
        average_percent: "99.02",
    },
    AccuracyEntry {
        architecture: ArchitectureId::Double,
        motor_percent: None,
        total_percent: None,
        average_percent: "98.43",
    },
    AccuracyEntry {
        architecture: ArchitectureId::AeJoint,
        motor_percent: Some("98.98"),
        total_percent: Some("98.89"),
        average_percent: "98.94",
    },
    AccuracyEntry {
        architecture: ArchitectureId::Mixed,
        motor_percent: Some("99.32"),
        total_percent: Some("98.98"),
        average_percent: "99.15",
    },
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegressionEntry {
    pub architecture: ArchitectureId,
    pub score: Score,
    pub mse: &'static str,
    pub rmse: &'static str,
    pub mae: &'static str,
}

const fn regression(
    architecture: ArchitectureId,
    score: Score,
    mse: &'static str,
    rmse: &'static str,
    mae: &'static str,
) -> RegressionEntry {
    RegressionEntry {
        architecture,
        score,
        mse,
        rmse,
        mae,
    }
}

/// Regression rows; no row was reference for the double-task network.
pub const REGRESSION: [RegressionEntry; 8] = [
    regression(ArchitectureId::Mlp, Score::Motor, "1.9603", "1.4", "0.8263"),
    regression(
        ArchitectureId::MlpAfterAe,
        Score::Motor,
        "0.9616",
        "0.9806",
        "0.538",
    ),
    regression(
        ArchitectureId::AeJoint,
        Score::Motor,
        "0.8971",
        "0.9471",
        "0.6012",
    ),
    regression(
        ArchitectureId::Mixed,
        Score::Motor,
        "0.1399",
        "0.374",
        "0.2442",
    ),
    regression(
        ArchitectureId::Mlp,
        Score::Total,
        "4.1276",
        "2.031",
        "1.2739",
    ),
    regression(
        ArchitectureId::MlpAfterAe,
        Score::Total,
        "1.0412",
        "1.02",
        "0.607",
    ),
    regression(
        ArchitectureId::AeJoint,
        Score::Total,
        "0.9196",
        "0.9589",
        "0.8697",
    ),
    regression(
        ArchitectureId::Mixed,
        Score::Total,
        "0.1753",
        "0.4186",
        "0.2857",
    ),
];

/// Regression rows in reference order, with the double-task network slotted
/// after the joint autoencoder.
pub const REGRESSION_ORDER: [ArchitectureId; 5] = [
    ArchitectureId::Mlp,
    ArchitectureId::MlpAfterAe,
    ArchitectureId::AeJoint,
    ArchitectureId::Double,
    ArchitectureId::Mixed,
];

pub fn ablation_entry(score: Score, n_hidden: usize) -> Option<&'static AblationEntry> {
    ABLATION
        .iter()
        .find(|e| e.score == score && e.n_hidden == n_hidden)
}

pub fn accuracy_entry(architecture: ArchitectureId) -> Option<&'static AccuracyEntry> {
    ACCURACY.iter().find(|e| e.architecture == architecture)
}

pub fn regression_entry(
    architecture: ArchitectureId,
    score: Score,
) -> Option<&'static RegressionEntry> {
    REGRESSION
        .iter()
        .find(|e| e.architecture == architecture && e.score == score)
}
