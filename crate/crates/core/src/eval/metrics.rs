use super::EvalError;
use crate::gold::Label;

fn check(a: usize, b: usize) -> Result<(), EvalError> {
    if a != b {
        return Err(EvalError::Length(a, b));
    }
    if a == 0 {
        return Err(EvalError::Empty);
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(predictions: &[f64], targets: &[f64]) -> Result<f64, EvalError> {
    check(predictions.len(), targets.len())?;
    Ok(predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / predictions.len() as f64)
}

/// Fraction of matching labels.
pub fn accuracy(predicted: &[Label], gold: &[Label]) -> Result<f64, EvalError> {
    check(predicted.len(), gold.len())?;
    Ok(predicted.iter().zip(gold).filter(|(p, g)| p == g).count() as f64 / predicted.len() as f64)
}

/// Labels from decision scores, with the number of exact-zero scores
/// (counted as positive).
pub fn labels_from_scores(scores: &[f64]) -> (Vec<Label>, usize) {
    let ties = scores.iter().filter(|s| **s == 0.0).count();
    if ties > 0 {
        log::debug!("{ties} decision scores are exactly 0 and count as positive");
    }
    (scores.iter().map(|s| Label::from_score(*s)).collect(), ties)
}

/// Mean and sample (n - 1) standard deviation; the deviation of a single
/// value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
