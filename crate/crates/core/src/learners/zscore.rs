use serde::{Deserialize, Serialize};

use super::LearnerError;

/// Per-feature standardisation fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScoreParams {
    pub means: Vec<f64>,
    /// Sample standard deviations (n - 1 denominator).
    pub stds: Vec<f64>,
}

pub fn zscore_fit(train: &[Vec<f64>]) -> Result<ZScoreParams, LearnerError> {
    if train.is_empty() {
        return Err(LearnerError::Empty);
    }
    if train.len() < 2 {
        return Err(LearnerError::DegenerateFit);
    }
    let n = train.len() as f64;
    let d = train[0].len();
    if train.iter().any(|r| r.len() != d) {
        return Err(LearnerError::Shape("ragged training matrix".into()));
    }
    let means: Vec<f64> = (0..d)
        .map(|j| train.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let stds = (0..d)
        .map(|j| {
            let ss: f64 = train.iter().map(|r| (r[j] - means[j]).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        })
        .collect();
    Ok(ZScoreParams { means, stds })
}

impl ZScoreParams {
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    /// Standardises one row; zero-variance features map to 0.
    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(x, (m, s))| if *s > 0.0 { (x - m) / s } else { 0.0 })
            .collect()
    }
}

pub fn zscore_apply(params: &ZScoreParams, matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, LearnerError> {
    matrix
        .iter()
        .map(|r| {
            if r.len() != params.len() {
                Err(LearnerError::Shape(format!(
                    "row has {} columns, z-score params have {}",
                    r.len(),
                    params.len()
                )))
            } else {
                Ok(params.apply_row(r))
            }
        })
        .collect()
}
