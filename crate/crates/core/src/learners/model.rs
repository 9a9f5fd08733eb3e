use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use super::max_margin::Task;
use super::zscore::ZScoreParams;
use super::LearnerError;

/// Format tag of serialized models; loading rejects any other value.
pub const MODEL_FORMAT_VERSION: &str = "priorpol-model/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    KernelReg,
    MaxMargin,
}

/// Transformations applied to raw feature rows before the kernel sees them:
/// z-scoring over the full schema, then column selection by `feature_mask`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocess {
    pub feature_names: Vec<String>,
    pub zscore: Option<ZScoreParams>,
    pub feature_mask: Vec<bool>,
}

impl Preprocess {
    pub fn identity(width: usize) -> Self {
        Preprocess {
            feature_names: (0..width).map(|i| format!("x{i}")).collect(),
            zscore: None,
            feature_mask: vec![true; width],
        }
    }

    pub fn width(&self) -> usize {
        self.feature_mask.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>, LearnerError> {
        if row.len() != self.width() {
            return Err(LearnerError::Config(format!(
                "input has {} features, model schema has {}",
                row.len(),
                self.width()
            )));
        }
        let z = match &self.zscore {
            Some(p) => p.apply_row(row),
            None => row.to_vec(),
        };
        Ok(z.into_iter()
            .zip(&self.feature_mask)
            .filter(|(_, keep)| **keep)
            .map(|(v, _)| v)
            .collect())
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, LearnerError> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

/// A fitted kernel expansion `f(x) = sum_i coef_i k(sv_i, x) + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: String,
    pub toolkit_version: String,
    pub task: Task,
    pub algorithm: Algorithm,
    pub kernel: KernelSpec,
    /// Penalty `C` and insensitivity `epsilon` for max-margin models.
    pub c: Option<f64>,
    pub epsilon: Option<f64>,
    pub preprocess: Preprocess,
    /// Support rows, already preprocessed.
    pub support: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub seed: Option<u64>,
}

impl TrainedModel {
    pub(crate) fn new(
        task: Task,
        algorithm: Algorithm,
        kernel: KernelSpec,
        width: usize,
        support: Vec<Vec<f64>>,
        coefficients: Vec<f64>,
        bias: f64,
    ) -> Self {
        TrainedModel {
            format_version: MODEL_FORMAT_VERSION.to_string(),
            toolkit_version: crate::VERSION.to_string(),
            task,
            algorithm,
            kernel,
            c: None,
            epsilon: None,
            preprocess: Preprocess::identity(width),
            support,
            coefficients,
            bias,
            seed: None,
        }
    }

    /// Attaches preprocessing fitted outside the solver. `preprocess` must
    /// map raw rows to the space the support rows live in.
    pub fn with_preprocess(mut self, preprocess: Preprocess) -> Self {
        self.preprocess = preprocess;
        self
    }

    fn decision(&self, z: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, a)| a * self.kernel.kernel.eval(sv, z))
            .sum::<f64>()
            + self.bias
    }

    /// Regression values or signed decision scores for raw feature rows.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, LearnerError> {
        rows.iter()
            .map(|r| self.preprocess.transform_row(r).map(|z| self.decision(&z)))
            .collect()
    }

    pub fn to_json(&self) -> Result<String, LearnerError> {
        serde_json::to_string_pretty(self).map_err(|e| LearnerError::Serde(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, LearnerError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| LearnerError::Serde(e.to_string()))?;
        let found = value
            .get("format_version")
            .and_then(|v| v.as_str())
            .unwrap_or("")
            .to_string();
        if found != MODEL_FORMAT_VERSION {
            return Err(LearnerError::FormatVersion {
                found,
                expected: MODEL_FORMAT_VERSION.to_string(),
            });
        }
        serde_json::from_value(value).map_err(|e| LearnerError::Serde(e.to_string()))
    }
}
