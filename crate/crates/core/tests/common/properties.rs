//! Dataset-free invariants, each returning `Err(description)` on the first
//! counterexample so they can run both as tests and as acceptance checks.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use updrs_core::dataset::{Record, Score, FEATURE_COUNT, MOTOR_SEVERE_ABOVE, TOTAL_SEVERE_ABOVE};
use updrs_core::experiment::{evaluate_regression, DECISION_THRESHOLD};
use updrs_core::nn::rng::seeded;
use updrs_core::nn::{
    bce_loss, mse_loss, relu, sigmoid, Activation, HeadSpec, LayerSpec, Matrix, Mode, Network,
    NetworkSpec,
};
use updrs_core::preprocess::{fit_normalizer, split_80_20};

pub type Check = Result<(), String>;

fn run<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Check
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config {
        cases: 256,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn record(motor: f64, total: f64, features: [f64; FEATURE_COUNT]) -> Record {
    Record {
        subject_id: 1,
        motor_updrs: motor,
        total_updrs: total,
        features,
    }
}

pub fn activation_identities() -> Check {
    if sigmoid(0.0) != 0.5 {
        return Err(format!("sigmoid(0) = {}", sigmoid(0.0)));
    }
    run(-1e6f64..1e6, |x| {
        let s = sigmoid(x);
        prop_assert!((0.0..=1.0).contains(&s) && s.is_finite());
        prop_assert!((sigmoid(-x) - (1.0 - s)).abs() <= 1e-15);
        prop_assert_eq!(relu(x), x.max(0.0));
        if x != 0.0 {
            let d = Activation::Relu.derivative(x, relu(x));
            prop_assert_eq!(d, if x > 0.0 { 1.0 } else { 0.0 });
        }
        let ds = Activation::Sigmoid.derivative(x, s);
        prop_assert!((ds - s * (1.0 - s)).abs() <= 1e-15);
        Ok(())
    })
}

pub fn loss_values() -> Check {
    let cases = [
        ("bce(0.5, 1)", bce_loss(0.5, 1.0), std::f64::consts::LN_2),
        ("bce(0.5, 0)", bce_loss(0.5, 0.0), std::f64::consts::LN_2),
        ("bce(0.9, 1)", bce_loss(0.9, 1.0), -(0.9f64.ln())),
        (
            "mse([0,0],[3,4])",
            mse_loss(&[0.0, 0.0], &[3.0, 4.0]).unwrap(),
            12.5,
        ),
        (
            "mse(x,x)",
            mse_loss(&[1.5, -2.0], &[1.5, -2.0]).unwrap(),
            0.0,
        ),
    ];
    for (name, got, want) in cases {
        if (got - want).abs() > 1e-12 {
            return Err(format!("{name} = {got}, expected {want}"));
        }
    }
    run((1e-6f64..1.0 - 1e-6, prop::bool::ANY), |(p, y)| {
        let t = f64::from(u8::from(y));
        let expected = -(t * p.ln() + (1.0 - t) * (1.0 - p).ln());
        prop_assert!((bce_loss(p, t) - expected).abs() <= 1e-12 * expected.max(1.0));
        Ok(())
    })
}

pub fn min_max_bounds() -> Check {
    let row = prop::array::uniform19(-1e4f64..1e4);
    run(prop::collection::vec(row, 1..40), |rows| {
        let records: Vec<Record> = rows.into_iter().map(|f| record(10.0, 20.0, f)).collect();
        let params = fit_normalizer(&records).unwrap();
        for r in &records {
            for v in params.apply(&r.features) {
                prop_assert!((0.0..=1.0).contains(&v), "{v}");
            }
        }
        Ok(())
    })
}

/// Mean over 10^4 dropout masks of a linear read-out equals the eval output within 1%.
pub fn dropout_expectation() -> Check {
    let spec = NetworkSpec {
        input_dim: 4,
        hidden: vec![LayerSpec::new(32, Activation::Relu).with_dropout(0.2)],
        heads: vec![HeadSpec::reconstruction(4, vec![])],
    };
    let net = Network::new(spec, &mut seeded(5)).unwrap();
    let row = [0.9, 0.4, 0.7, 0.2];
    let samples = 20_000;
    let batch = Matrix::from_rows(&vec![row; samples]).unwrap();
    let eval = net
        .predict(&Matrix::from_rows(&[row]).unwrap())
        .unwrap()
        .remove(0);
    let pass = net.forward(&batch, Mode::Train(&mut seeded(6))).unwrap();
    let out = pass.output(0);
    for c in 0..4 {
        let mean = out.column(c).iter().sum::<f64>() / samples as f64;
        let want = eval.get(0, c);
        let rel = (mean - want).abs() / want.abs().max(1e-12);
        if rel > 0.01 {
            return Err(format!(
                "output {c}: mean {mean} vs eval {want} (rel {rel:.4})"
            ));
        }
    }
    Ok(())
}

pub fn threshold_labels() -> Check {
    let f = [0.0; FEATURE_COUNT];
    let at = record(MOTOR_SEVERE_ABOVE, TOTAL_SEVERE_ABOVE, f).labels();
    if at.motor_severe || at.total_severe {
        return Err(format!("scores exactly at the thresholds labelled {at:?}"));
    }
    if record(20.0, 25.0, f).labels().severe(Score::Total)
        || record(20.0, 25.0, f).labels().severe(Score::Motor)
    {
        return Err("20.0 / 25.0 must be non-severe".into());
    }
    let above = record(20.0001, 25.0001, f).labels();
    if !(above.motor_severe && above.total_severe) {
        return Err(format!(
            "scores just above the thresholds labelled {above:?}"
        ));
    }
    if DECISION_THRESHOLD != 0.5 {
        return Err("decision threshold must be 0.5".into());
    }
    run((0.0f64..108.0, 0.0f64..108.0), |(a, b)| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for score in Score::BOTH {
            let l = record(lo, lo, f).labels().severe(score);
            let h = record(hi, hi, f).labels().severe(score);
            prop_assert!(!l || h, "labels not monotone in {score}: {lo} -> {hi}");
        }
        Ok(())
    })
}

pub fn split_sizes() -> Check {
    run((1usize..3000, any::<u64>()), |(n, seed)| {
        let s = split_80_20(n, seed);
        prop_assert_eq!(s.train_indices.len(), (n as f64 * 0.8).floor() as usize);
        prop_assert_eq!(s.train_indices.len() + s.test_indices.len(), n);
        let mut all: Vec<usize> = s
            .train_indices
            .iter()
            .chain(&s.test_indices)
            .copied()
            .collect();
        all.sort_unstable();
        prop_assert!(all.iter().copied().eq(0..n));
        Ok(())
    })
}

pub fn regression_metric_identities() -> Check {
    let pair = (-200.0f64..200.0, -200.0f64..200.0);
    run(prop::collection::vec(pair, 1..100), |pairs| {
        let (p, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let m = evaluate_regression(&p, &t).unwrap();
        prop_assert!((m.rmse * m.rmse - m.mse).abs() <= 1e-9 * m.mse.max(1.0));
        prop_assert!(m.mae <= m.rmse * (1.0 + 1e-12) + 1e-12);
        Ok(())
    })
}

pub fn all() -> Vec<(&'static str, Check)> {
    vec![
        ("activation identities", activation_identities()),
        ("loss values", loss_values()),
        ("min-max bounds on training data", min_max_bounds()),
        ("dropout expectation", dropout_expectation()),
        ("threshold labels", threshold_labels()),
        ("split sizes", split_sizes()),
        ("rmse^2 = mse, mae <= rmse", regression_metric_identities()),
    ]
}
