use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::report::{EvalReport, Metric};
use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignificanceTest {
    PairedT,
    ApproxRandomization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub test: SignificanceTest,
    /// t statistic, or the observed absolute accuracy difference.
    #[serde(with = "non_finite")]
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    /// Set when the paired differences have zero variance but a nonzero
    /// mean, where the t statistic is unbounded.
    pub degenerate: bool,
}

/// JSON has no infinities; they are written as strings.
mod non_finite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Two-tailed paired t-test with n - 1 degrees of freedom.
pub fn t_test_paired(a: &[f64], b: &[f64]) -> Result<SignificanceResult, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::Length(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(EvalError::Config(format!("paired t-test needs at least 2 pairs, got {n}")));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let result = |statistic, p_value, degenerate| SignificanceResult {
        test: SignificanceTest::PairedT,
        statistic,
        p_value,
        n,
        degenerate,
    };
    // differences equal up to rounding count as constant
    let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if var.sqrt() <= 1e-12 * scale || scale == 0.0 {
        return Ok(if mean.abs() <= 1e-12 * scale || scale == 0.0 {
            result(0.0, 1.0, false)
        } else {
            log::warn!("paired differences are constant and nonzero; t is unbounded");
            result(mean.signum() * f64::INFINITY, 0.0, true)
        });
    }
    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n as f64 - 1.0)
        .map_err(|e| EvalError::Config(e.to_string()))?;
    let p = (2.0 * dist.cdf(-t.abs())).min(1.0);
    Ok(result(t, p, false))
}

/// Approximate randomization on per-instance correctness: each pair is
/// swapped with probability 1/2 and the absolute difference in correct
/// counts compared with the observed one. p = (c + 1) / (R + 1).
pub fn approx_randomization(
    correct_a: &[bool],
    correct_b: &[bool],
    iterations: usize,
    rng: &mut dyn RngCore,
) -> Result<SignificanceResult, EvalError> {
    if correct_a.len() != correct_b.len() {
        return Err(EvalError::Length(correct_a.len(), correct_b.len()));
    }
    if correct_a.is_empty() {
        return Err(EvalError::Empty);
    }
    if iterations == 0 {
        return Err(EvalError::Config("approximate randomization needs at least 1 iteration".into()));
    }
    // only discordant pairs move the difference; each contributes +1 or -1
    let mut observed: i64 = 0;
    let mut discordant: Vec<i64> = Vec::new();
    for (&x, &y) in correct_a.iter().zip(correct_b) {
        let v = x as i64 - y as i64;
        observed += v;
        if v != 0 {
            discordant.push(v);
        }
    }
    let observed = observed.abs();
    let mut at_least = 0usize;
    for _ in 0..iterations {
        let mut diff: i64 = 0;
        for &v in &discordant {
            diff += if rng.random::<bool>() { -v } else { v };
        }
        if diff.abs() >= observed {
            at_least += 1;
        }
    }
    Ok(SignificanceResult {
        test: SignificanceTest::ApproxRandomization,
        statistic: observed as f64 / correct_a.len() as f64,
        p_value: (at_least + 1) as f64 / (iterations + 1) as f64,
        n: correct_a.len(),
        degenerate: false,
    })
}

/// Paired comparison of two systems evaluated on the same splits and
/// instances: t-test over per-instance absolute errors, or approximate
/// randomization over per-instance correctness, both pooled across splits.
pub fn compare_reports(
    a: &EvalReport,
    b: &EvalReport,
    iterations: usize,
    rng: &mut dyn RngCore,
) -> Result<SignificanceResult, EvalError> {
    if a.metric != b.metric {
        return Err(EvalError::Unpaired(format!("{} and {} use different metrics", a.system, b.system)));
    }
    let same_instances = a.per_instance.len() == b.per_instance.len()
        && a.per_instance
            .iter()
            .zip(&b.per_instance)
            .all(|(x, y)| x.split == y.split && x.key == y.key);
    if !same_instances || a.per_split.len() != b.per_split.len() {
        return Err(EvalError::Unpaired(format!(
            "{} and {} were not evaluated on the same instances",
            a.system, b.system
        )));
    }
    match a.metric {
        Metric::Mae => {
            let ea: Vec<f64> = a.per_instance.iter().map(|o| o.abs_error()).collect();
            let eb: Vec<f64> = b.per_instance.iter().map(|o| o.abs_error()).collect();
            t_test_paired(&ea, &eb)
        }
        Metric::Accuracy => {
            let ca: Vec<bool> = a.per_instance.iter().map(|o| o.correct()).collect();
            let cb: Vec<bool> = b.per_instance.iter().map(|o| o.correct()).collect();
            approx_randomization(&ca, &cb, iterations, rng)
        }
    }
}
