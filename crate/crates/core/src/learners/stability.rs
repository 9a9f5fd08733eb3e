//! Stability selection: L1 fits on many row subsamples, keeping features
//! whose coefficients are non-zero in a large enough share of them.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::fold_assignment;
use super::lasso::lasso_fit;
use super::{check_xy, LearnerError};
use crate::rng::stream;

const LASSO_MAX_ITER: usize = 1000;
const LASSO_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub sample_fraction: f64,
    pub threshold: f64,
    pub resamples: usize,
    pub l1_penalty: f64,
}

impl SelectionConfig {
    /// 75% subsamples, 25% threshold, 1,000 resamples.
    pub fn with_penalty(l1_penalty: f64) -> Self {
        SelectionConfig {
            sample_fraction: 0.75,
            threshold: 0.25,
            resamples: 1000,
            l1_penalty,
        }
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        if !(self.l1_penalty > 0.0 && self.l1_penalty.is_finite()) {
            return Err(LearnerError::Config(format!(
                "l1 penalty must be positive, got {}",
                self.l1_penalty
            )));
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return Err(LearnerError::Config(format!(
                "sample fraction must lie in (0, 1], got {}",
                self.sample_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(LearnerError::Config(format!(
                "selection threshold must lie in [0, 1], got {}",
                self.threshold
            )));
        }
        if self.resamples == 0 {
            return Err(LearnerError::Config("at least one resample is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub frequencies: Vec<f64>,
    pub mask: Vec<bool>,
}

impl SelectionResult {
    /// Mask for another threshold over the same frequencies.
    pub fn mask_at(&self, threshold: f64) -> Vec<bool> {
        self.frequencies.iter().map(|f| *f >= threshold).collect()
    }
}

/// Runs `config.resamples` L1 fits on subsamples of `floor(fraction * n)`
/// rows drawn without replacement. Resample `r` uses stream `selection/r`
/// of `seed`, so the result does not depend on thread count.
pub fn stability_select(
    x: &[Vec<f64>],
    y: &[f64],
    config: &SelectionConfig,
    seed: u64,
) -> Result<SelectionResult, LearnerError> {
    config.validate()?;
    let d = check_xy(x, y)?;
    let n = x.len();
    let m = (config.sample_fraction * n as f64).floor() as usize;
    if m < 2 {
        return Err(LearnerError::Config(format!(
            "a {} subsample of {n} rows leaves fewer than two rows",
            config.sample_fraction
        )));
    }

    let counts: Vec<Vec<u32>> = (0..config.resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, &format!("selection/{r}"));
            let mut rows: Vec<usize> = sample(&mut rng, n, m).into_vec();
            rows.sort_unstable();
            let xs: Vec<Vec<f64>> = rows.iter().map(|i| x[*i].clone()).collect();
            let ys: Vec<f64> = rows.iter().map(|i| y[*i]).collect();
            let fit = lasso_fit(&xs, &ys, config.l1_penalty, LASSO_MAX_ITER, LASSO_TOL)?;
            Ok(fit.coefficients.iter().map(|c| u32::from(*c != 0.0)).collect())
        })
        .collect::<Result<_, LearnerError>>()?;

    let frequencies: Vec<f64> = (0..d)
        .map(|j| counts.iter().map(|c| c[j]).sum::<u32>() as f64 / config.resamples as f64)
        .collect();
    let mask = frequencies.iter().map(|f| *f >= config.threshold).collect();
    Ok(SelectionResult { frequencies, mask })
}

/// Penalty grid from `lambda_max` (the smallest penalty zeroing every
/// coefficient) down to `lambda_max / 1000`, 20 log-spaced values.
pub fn default_penalty_grid(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let d = x.first().map_or(0, Vec::len);
    let y_mean = y.iter().sum::<f64>() / n;
    let lambda_max = (0..d)
        .map(|j| {
            let mean = x.iter().map(|r| r[j]).sum::<f64>() / n;
            (x.iter().zip(y).map(|(r, t)| (r[j] - mean) * (t - y_mean)).sum::<f64>() / n).abs()
        })
        .fold(0.0, f64::max)
        .max(1e-8);
    (0..20)
        .map(|i| lambda_max * 10f64.powf(-3.0 * i as f64 / 19.0))
        .collect()
}

/// Picks the penalty with the lowest 5-fold cross-validated squared error
/// (larger penalty wins ties). `candidates` defaults to
/// [`default_penalty_grid`] when empty.
pub fn choose_l1_penalty(
    x: &[Vec<f64>],
    y: &[f64],
    candidates: &[f64],
    seed: u64,
) -> Result<f64, LearnerError> {
    check_xy(x, y)?;
    let grid = if candidates.is_empty() {
        default_penalty_grid(x, y)
    } else {
        candidates.to_vec()
    };
    let folds = fold_assignment(x.len(), 5, None, &mut stream(seed, "selection/penalty-cv"))?;
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..folds.k).map(|f| folds.split(f)).collect();
    let errors: Vec<f64> = grid
        .par_iter()
        .map(|lambda| {
            let mut se = 0.0;
            for (train, test) in &splits {
                let xs: Vec<Vec<f64>> = train.iter().map(|i| x[*i].clone()).collect();
                let ys: Vec<f64> = train.iter().map(|i| y[*i]).collect();
                let fit = lasso_fit(&xs, &ys, *lambda, LASSO_MAX_ITER, LASSO_TOL)?;
                for i in test {
                    let pred = fit.intercept
                        + x[*i].iter().zip(&fit.coefficients).map(|(a, b)| a * b).sum::<f64>();
                    se += (pred - y[*i]).powi(2);
                }
            }
            Ok(se / x.len() as f64)
        })
        .collect::<Result<_, LearnerError>>()?;
    let mut best = 0;
    for (i, e) in errors.iter().enumerate() {
        let better = *e < errors[best] || (*e == errors[best] && grid[i] > grid[best]);
        if better {
            best = i;
        }
    }
    Ok(grid[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn noise_matrix(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = stream(seed, "fixture");
        (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn frequencies_in_unit_interval_and_mask_monotone() {
        let x = noise_matrix(60, 5, 1);
        let y: Vec<f64> = x.iter().map(|r| r[0] + 0.5 * r[1]).collect();
        let mut cfg = SelectionConfig::with_penalty(0.05);
        cfg.resamples = 50;
        let res = stability_select(&x, &y, &cfg, 9).unwrap();
        assert!(res.frequencies.iter().all(|f| (0.0..=1.0).contains(f)));
        let mut prev = res.mask_at(0.0);
        for t in [0.1, 0.3, 0.5, 0.9, 1.0] {
            let m = res.mask_at(t);
            assert!(m.iter().zip(&prev).all(|(now, before)| !*now || *before));
            prev = m;
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let x = noise_matrix(40, 4, 2);
        let y: Vec<f64> = x.iter().map(|r| r[2]).collect();
        let mut cfg = SelectionConfig::with_penalty(0.1);
        cfg.resamples = 30;
        assert_eq!(
            stability_select(&x, &y, &cfg, 5).unwrap(),
            stability_select(&x, &y, &cfg, 5).unwrap()
        );
    }

    #[test]
    fn config_errors() {
        let x = noise_matrix(10, 2, 3);
        let y = vec![0.0; 10];
        assert!(stability_select(&x, &y, &SelectionConfig::with_penalty(0.0), 1).is_err());
        let mut cfg = SelectionConfig::with_penalty(0.1);
        cfg.sample_fraction = 0.0;
        assert!(stability_select(&x, &y, &cfg, 1).is_err());
    }

    #[test]
    fn cv_penalty_comes_from_the_grid() {
        let x = noise_matrix(50, 3, 4);
        let y: Vec<f64> = x.iter().map(|r| r[1]).collect();
        let grid = default_penalty_grid(&x, &y);
        let chosen = choose_l1_penalty(&x, &y, &[], 1).unwrap();
        assert!(grid.contains(&chosen));
        // noiseless signal prefers the weakest penalty
        assert_eq!(chosen, *grid.last().unwrap());
    }
}
