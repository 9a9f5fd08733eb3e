//! Exact-inference kernel regression with Gaussian noise.
//!
//! For a kernel `k` and noise variance `s2`, the posterior mean at `x` is
//! `k(x, X) a` with `a = (K + s2 I)^-1 y`. Hyperparameters are chosen among a
//! bounded candidate list by the log marginal likelihood
//! `-1/2 y'a - 1/2 log|K + s2 I| - n/2 log 2pi`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::kernel::{gram_matrix, Kernel, KernelSpec};
use super::max_margin::Task;
use super::model::{Algorithm, TrainedModel};
use super::{check_xy, LearnerError};

/// Upper bound on hyperparameter candidates evaluated per fit.
pub const MAX_KERNEL_CANDIDATES: usize = 100;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KernelRegressionOptions {
    /// Fit on `y - mean(y)` and add the mean back as bias.
    pub center_targets: bool,
}

/// Linear scales {0.01, 0.1, 1, 10} and rbf gammas 2^-15, 2^-13, ..., 2^3,
/// each crossed with noise variances 10^-6 ... 10^0: 98 candidates.
pub fn default_kernel_candidates() -> Vec<KernelSpec> {
    let noises: Vec<f64> = (-6..=0).map(|e| 10f64.powi(e)).collect();
    let mut out = Vec::new();
    for scale in [0.01, 0.1, 1.0, 10.0] {
        for &s2 in &noises {
            out.push(KernelSpec::new(Kernel::Linear { scale }, s2));
        }
    }
    for e in (-15..=3).step_by(2) {
        for &s2 in &noises {
            out.push(KernelSpec::new(Kernel::Rbf { gamma: 2f64.powi(e) }, s2));
        }
    }
    out
}

struct Solved {
    alpha: Vec<f64>,
    lml: f64,
}

fn solve(spec: &KernelSpec, x: &[Vec<f64>], y: &[f64]) -> Result<Solved, LearnerError> {
    let n = x.len();
    let mut k = gram_matrix(&spec.kernel, x);
    for i in 0..n {
        k[i * n + i] += spec.noise_variance;
    }
    let scale = (0..n).map(|i| k[i * n + i]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_row_slice(n, n, &k);
    let chol = a.cholesky().ok_or(LearnerError::Singular(spec.noise_variance))?;
    let l = chol.l_dirty();
    let min_pivot = (0..n).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    if !(min_pivot > 1e-13 * scale) {
        return Err(LearnerError::Singular(spec.noise_variance));
    }
    let yv = DVector::from_column_slice(y);
    let alpha = chol.solve(&yv);
    if alpha.iter().any(|v| !v.is_finite()) {
        return Err(LearnerError::Singular(spec.noise_variance));
    }
    let log_det: f64 = 2.0 * (0..n).map(|i| l[(i, i)].ln()).sum::<f64>();
    let lml = -0.5 * yv.dot(&alpha) - 0.5 * log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    Ok(Solved {
        alpha: alpha.iter().copied().collect(),
        lml,
    })
}

/// Log marginal likelihood of `y` under one candidate.
pub fn log_marginal_likelihood(spec: &KernelSpec, x: &[Vec<f64>], y: &[f64]) -> Result<f64, LearnerError> {
    check_xy(x, y)?;
    spec.validate()?;
    solve(spec, x, y).map(|s| s.lml)
}

pub fn train_kernel_regression(
    x: &[Vec<f64>],
    y: &[f64],
    candidates: &[KernelSpec],
) -> Result<TrainedModel, LearnerError> {
    train_kernel_regression_with(x, y, candidates, KernelRegressionOptions::default())
}

/// Fits every candidate and keeps the one with the highest marginal
/// likelihood (first wins on ties). Candidates whose system is singular are
/// skipped; if none survives the solver error is returned.
pub fn train_kernel_regression_with(
    x: &[Vec<f64>],
    y: &[f64],
    candidates: &[KernelSpec],
    options: KernelRegressionOptions,
) -> Result<TrainedModel, LearnerError> {
    let width = check_xy(x, y)?;
    if x.len() < 2 {
        return Err(LearnerError::Shape("kernel regression needs at least two rows".into()));
    }
    if candidates.is_empty() || candidates.len() > MAX_KERNEL_CANDIDATES {
        return Err(LearnerError::Config(format!(
            "between 1 and {MAX_KERNEL_CANDIDATES} kernel candidates required, got {}",
            candidates.len()
        )));
    }
    for c in candidates {
        c.validate()?;
    }
    let offset = if options.center_targets {
        y.iter().sum::<f64>() / y.len() as f64
    } else {
        0.0
    };
    let yc: Vec<f64> = y.iter().map(|v| v - offset).collect();

    let results: Vec<Result<Solved, LearnerError>> =
        candidates.par_iter().map(|c| solve(c, x, &yc)).collect();

    let mut best: Option<(usize, Solved)> = None;
    let mut last_err = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => {
                if best.as_ref().is_none_or(|(_, b)| s.lml > b.lml) {
                    best = Some((i, s));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let (idx, solved) = match best {
        Some(b) => b,
        None => return Err(last_err.unwrap_or(LearnerError::Empty)),
    };
    Ok(TrainedModel::new(
        Task::Regression,
        Algorithm::KernelReg,
        candidates[idx],
        width,
        x.to_vec(),
        solved.alpha,
        offset,
    ))
}
