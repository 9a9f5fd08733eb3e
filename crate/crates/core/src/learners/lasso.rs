//! L1-penalised least squares by cyclic coordinate descent.
//!
//! Minimises `1/(2n) |y - b - Xw|^2 + lambda |w|_1` with an unpenalised
//! intercept `b`.

use super::{check_xy, LearnerError};

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

pub fn lasso_fit(
    x: &[Vec<f64>],
    y: &[f64],
    lambda: f64,
    max_iter: usize,
    tol: f64,
) -> Result<LassoFit, LearnerError> {
    let d = check_xy(x, y)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(LearnerError::Config(format!("l1 penalty must be positive, got {lambda}")));
    }
    let n = x.len();
    let nf = n as f64;
    let x_mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / nf).collect();
    let y_mean = y.iter().sum::<f64>() / nf;
    // column-major centred copy
    let cols: Vec<Vec<f64>> = (0..d)
        .map(|j| x.iter().map(|r| r[j] - x_mean[j]).collect())
        .collect();
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>() / nf).collect();
    let mut resid: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let mut w = vec![0.0; d];

    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut max_delta: f64 = 0.0;
        for j in 0..d {
            if norms[j] == 0.0 {
                continue;
            }
            let col = &cols[j];
            let rho = col.iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() / nf + norms[j] * w[j];
            let new = soft_threshold(rho, lambda) / norms[j];
            let delta = new - w[j];
            if delta != 0.0 {
                for (r, a) in resid.iter_mut().zip(col) {
                    *r -= delta * a;
                }
                w[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        if max_delta < tol {
            break;
        }
    }
    let intercept = y_mean - w.iter().zip(&x_mean).map(|(a, m)| a * m).sum::<f64>();
    Ok(LassoFit {
        coefficients: w,
        intercept,
        iterations,
    })
}
