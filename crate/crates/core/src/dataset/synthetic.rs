//! Seeded synthetic recordings with the canonical column layout.
//!
//! Voice features and both UPDRS scores are driven by a per-recording severity
//! value, so the scores are learnable from the features. Intended for smoke
//! tests and demos when the real recordings are not available.

use rand::Rng as _;

use super::{Dataset, Record, FEATURE_COUNT};
use crate::nn::rng::seeded;

/// Typical magnitude of each voice feature (columns 3..19).
const VOICE_SCALE: [f64; FEATURE_COUNT - 3] = [
    0.006, 0.00004, 0.003, 0.0033, 0.009, 0.034, 0.31, 0.017, 0.02, 0.027, 0.05, 0.03, 21.7, 0.54,
    0.65, 0.22,
];

pub fn generate(subjects: u32, records_per_subject: usize, seed: u64) -> Dataset {
    let mut rng = seeded(seed);
    let mut records = Vec::with_capacity(subjects as usize * records_per_subject);
    for subject_id in 1..=subjects {
        let age = rng.gen_range(40.0f64..85.0).round();
        let sex = f64::from(u8::from(rng.gen_bool(0.3)));
        let base: f64 = rng.gen_range(0.0..1.0);
        for _ in 0..records_per_subject {
            let test_time: f64 = rng.gen_range(0.0..215.0);
            let severity = (base + test_time / 2000.0 + rng.gen_range(-0.03..0.03)).clamp(0.0, 1.2);
            let mut features = [0.0; FEATURE_COUNT];
            features[0] = age;
            features[1] = sex;
            features[2] = test_time;
            for (k, scale) in VOICE_SCALE.iter().enumerate() {
                let direction = if k % 3 == 0 { -0.4 } else { 0.8 };
                let noise: f64 = rng.gen_range(-0.05..0.05);
                features[3 + k] = scale * (1.0 + direction * (severity - 0.5) + noise);
            }
            let motor = 6.0 + 32.0 * severity + 0.05 * (age - 60.0);
            let total = 1.3 * motor + 2.0;
            records.push(Record {
                subject_id,
                motor_updrs: motor,
                total_updrs: total,
                features,
            });
        }
    }
    Dataset::new(records, format!("synthetic(seed={seed})"))
}
