//! Learners that blend formula features into predictions.
//!
//! Inputs are dense row-major matrices (`&[Vec<f64>]`). Training entry points
//! return a [`TrainedModel`], which carries its own preprocessing (z-score
//! parameters and feature mask) so that prediction works on raw feature rows.

mod cv;
mod kernel;
mod kernel_regression;
mod lasso;
mod max_margin;
mod model;
mod smo;
mod stability;
mod zscore;

pub use cv::{fold_assignment, Folds};
pub use kernel::{gram_matrix, Kernel, KernelSpec};
pub use kernel_regression::{
    default_kernel_candidates, log_marginal_likelihood, train_kernel_regression,
    train_kernel_regression_with, KernelRegressionOptions, MAX_KERNEL_CANDIDATES,
};
pub use lasso::{lasso_fit, LassoFit};
pub use max_margin::{
    cross_validate, fit_point, train_max_margin, GridPoint, GridResult, MaxMarginGrid, Task,
};
pub use model::{Algorithm, Preprocess, TrainedModel, MODEL_FORMAT_VERSION};
pub use smo::{solve_svc, solve_svr, GramView, SmoOptions, SmoSolution};
pub use stability::{
    choose_l1_penalty, default_penalty_grid, stability_select, SelectionConfig, SelectionResult,
};
pub use zscore::{zscore_apply, zscore_fit, ZScoreParams};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LearnerError {
    #[error("training data is empty")]
    Empty,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("z-score fit needs at least two rows")]
    DegenerateFit,
    #[error("kernel matrix is numerically singular; raise the noise variance floor above {0}")]
    Singular(f64),
    #[error("fold error: {rows} rows cannot fill {folds} folds")]
    Folds { rows: usize, folds: usize },
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("labels must be -1 or +1, found {0}")]
    BadLabel(f64),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("model format `{found}` is not supported (expected `{expected}`)")]
    FormatVersion { found: String, expected: String },
    #[error("model serialization: {0}")]
    Serde(String),
}

pub(crate) fn check_xy(x: &[Vec<f64>], y: &[f64]) -> Result<usize, LearnerError> {
    if x.is_empty() {
        return Err(LearnerError::Empty);
    }
    if x.len() != y.len() {
        return Err(LearnerError::Shape(format!("{} rows but {} targets", x.len(), y.len())));
    }
    let d = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != d) {
        return Err(LearnerError::Shape(format!(
            "rows have {} and {} columns",
            d,
            bad.len()
        )));
    }
    Ok(d)
}
