//! Max-margin learners with grid search in k-fold cross-validation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{fold_assignment, Folds};
use super::kernel::{gram_matrix, Kernel, KernelSpec};
use super::model::{Algorithm, TrainedModel};
use super::smo::{solve_svc, solve_svr, GramView, SmoOptions, SmoSolution};
use super::{check_xy, LearnerError};
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Classification,
}

/// Hyperparameter grid. Every `(kernel, C[, epsilon])` combination is one
/// point; the kernels are linear (when enabled) followed by one rbf kernel
/// per gamma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxMarginGrid {
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub linear: bool,
    pub rbf: bool,
}

impl Default for MaxMarginGrid {
    /// C in 2^-5, 2^-3, ..., 2^15; gamma in 2^-15, 2^-13, ..., 2^3;
    /// epsilon in {0.01, 0.1, 0.5}; both kernels.
    fn default() -> Self {
        MaxMarginGrid {
            c: (-5..=15).step_by(2).map(|e| 2f64.powi(e)).collect(),
            gamma: (-15..=3).step_by(2).map(|e| 2f64.powi(e)).collect(),
            epsilon: vec![0.01, 0.1, 0.5],
            linear: true,
            rbf: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub kernel: Kernel,
    pub c: f64,
    pub epsilon: Option<f64>,
}

impl GridPoint {
    /// Tie-break order: smaller C, then linear before rbf and smaller gamma,
    /// then smaller epsilon.
    fn tie_key(&self) -> (f64, u8, f64, f64) {
        (
            self.c,
            self.kernel.rank(),
            self.kernel.gamma_or_zero(),
            self.epsilon.unwrap_or(0.0),
        )
    }

    fn precedes(&self, other: &GridPoint) -> bool {
        let (a, b) = (self.tie_key(), other.tie_key());
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
            .then(a.3.total_cmp(&b.3))
            .is_lt()
    }
}

impl MaxMarginGrid {
    pub fn kernels(&self) -> Vec<Kernel> {
        let mut out = Vec::new();
        if self.linear {
            out.push(Kernel::Linear { scale: 1.0 });
        }
        if self.rbf {
            out.extend(self.gamma.iter().map(|g| Kernel::Rbf { gamma: *g }));
        }
        out
    }

    pub fn points(&self, task: Task) -> Vec<GridPoint> {
        let eps: Vec<Option<f64>> = match task {
            Task::Classification => vec![None],
            Task::Regression => self.epsilon.iter().map(|e| Some(*e)).collect(),
        };
        let mut out = Vec::new();
        for kernel in self.kernels() {
            for &c in &self.c {
                for &epsilon in &eps {
                    out.push(GridPoint { kernel, c, epsilon });
                }
            }
        }
        out
    }

    fn validate(&self, task: Task) -> Result<(), LearnerError> {
        if self.points(task).is_empty() {
            return Err(LearnerError::Config("hyperparameter grid is empty".into()));
        }
        for k in self.kernels() {
            k.validate()?;
        }
        if self.c.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(LearnerError::Config("every C must be positive".into()));
        }
        if task == Task::Regression && self.epsilon.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(LearnerError::Config("every epsilon must be non-negative".into()));
        }
        Ok(())
    }
}

/// Cross-validated score of every grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub task: Task,
    /// Mean fold accuracy (classification) or mean fold MAE (regression).
    pub scores: Vec<(GridPoint, f64)>,
    pub best: GridPoint,
    pub best_score: f64,
}

fn check_task(y: &[f64], task: Task) -> Result<(), LearnerError> {
    if task == Task::Classification {
        if let Some(bad) = y.iter().find(|v| **v != 1.0 && **v != -1.0) {
            return Err(LearnerError::BadLabel(*bad));
        }
        if y.iter().all(|v| *v == y[0]) {
            return Err(LearnerError::SingleClass);
        }
    }
    Ok(())
}

fn fit(
    gram: GramView,
    y: &[f64],
    point: &GridPoint,
    task: Task,
    opts: &SmoOptions,
) -> Result<SmoSolution, LearnerError> {
    match task {
        Task::Classification => solve_svc(gram, y, point.c, opts),
        Task::Regression => solve_svr(gram, y, point.c, point.epsilon.unwrap_or(0.1), opts),
    }
}

/// Metric of one fold: accuracy or MAE.
fn fold_metric(
    gram: &[f64],
    n: usize,
    y: &[f64],
    train: &[usize],
    test: &[usize],
    point: &GridPoint,
    task: Task,
    opts: &SmoOptions,
) -> Result<f64, LearnerError> {
    let y_train: Vec<f64> = train.iter().map(|i| y[*i]).collect();
    let predictions: Vec<f64> = if task == Task::Classification && y_train.iter().all(|v| *v == y_train[0]) {
        vec![y_train[0]; test.len()]
    } else {
        let sol = fit(GramView::subset(gram, n, train), &y_train, point, task, opts)?;
        test.iter()
            .map(|t| {
                train
                    .iter()
                    .zip(&sol.coefficients)
                    .filter(|(_, a)| **a != 0.0)
                    .map(|(i, a)| a * gram[t * n + i])
                    .sum::<f64>()
                    + sol.bias
            })
            .collect()
    };
    let m = test.len() as f64;
    Ok(match task {
        Task::Classification => {
            test.iter()
                .zip(&predictions)
                .filter(|(t, p)| (if **p >= 0.0 { 1.0 } else { -1.0 }) == y[**t])
                .count() as f64
                / m
        }
        Task::Regression => test.iter().zip(&predictions).map(|(t, p)| (p - y[*t]).abs()).sum::<f64>() / m,
    })
}

fn better(task: Task, a: f64, b: f64) -> bool {
    match task {
        Task::Classification => a > b,
        Task::Regression => a < b,
    }
}

/// Scores every grid point by its mean metric over `folds` folds
/// (stratified for classification). The fold assignment comes from stream
/// `cv` of `seed`.
pub fn cross_validate(
    x: &[Vec<f64>],
    y: &[f64],
    task: Task,
    grid: &MaxMarginGrid,
    folds: usize,
    seed: u64,
) -> Result<GridResult, LearnerError> {
    check_xy(x, y)?;
    check_task(y, task)?;
    grid.validate(task)?;
    let n = x.len();
    let strata = (task == Task::Classification).then_some(y);
    let assignment: Folds = fold_assignment(n, folds, strata, &mut stream(seed, "cv"))?;
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..folds).map(|f| assignment.split(f)).collect();
    let opts = SmoOptions::default();

    let mut scores = Vec::new();
    for kernel in grid.kernels() {
        let gram = gram_matrix(&kernel, x);
        let points: Vec<GridPoint> = grid
            .points(task)
            .into_iter()
            .filter(|p| p.kernel == kernel)
            .collect();
        let jobs: Vec<(usize, usize)> = (0..points.len())
            .flat_map(|p| (0..folds).map(move |f| (p, f)))
            .collect();
        let metrics: Vec<f64> = jobs
            .par_iter()
            .map(|(p, f)| {
                let (train, test) = &splits[*f];
                fold_metric(&gram, n, y, train, test, &points[*p], task, &opts)
            })
            .collect::<Result<_, LearnerError>>()?;
        for (p, point) in points.iter().enumerate() {
            let mean = metrics[p * folds..(p + 1) * folds].iter().sum::<f64>() / folds as f64;
            scores.push((*point, mean));
        }
    }

    let (mut best, mut best_score) = scores[0];
    for (point, score) in &scores[1..] {
        if better(task, *score, best_score) || (*score == best_score && point.precedes(&best)) {
            best = *point;
            best_score = *score;
        }
    }
    Ok(GridResult {
        task,
        scores,
        best,
        best_score,
    })
}

/// Fits one grid point on all rows.
pub fn fit_point(x: &[Vec<f64>], y: &[f64], task: Task, point: &GridPoint) -> Result<TrainedModel, LearnerError> {
    let width = check_xy(x, y)?;
    check_task(y, task)?;
    let gram = gram_matrix(&point.kernel, x);
    let sol = fit(GramView::full(&gram, x.len()), y, point, task, &SmoOptions::default())?;
    let (support, coefficients): (Vec<Vec<f64>>, Vec<f64>) = x
        .iter()
        .zip(&sol.coefficients)
        .filter(|(_, a)| **a != 0.0)
        .map(|(r, a)| (r.clone(), *a))
        .unzip();
    let mut model = TrainedModel::new(
        task,
        Algorithm::MaxMargin,
        KernelSpec::new(point.kernel, 0.0),
        width,
        support,
        coefficients,
        sol.bias,
    );
    model.c = Some(point.c);
    model.epsilon = point.epsilon;
    Ok(model)
}

/// Grid search in cross-validation, then a refit on all rows with the
/// winning point.
pub fn train_max_margin(
    x: &[Vec<f64>],
    y: &[f64],
    task: Task,
    grid: &MaxMarginGrid,
    folds: usize,
    seed: u64,
) -> Result<TrainedModel, LearnerError> {
    let result = cross_validate(x, y, task, grid, folds, seed)?;
    let mut model = fit_point(x, y, task, &result.best)?;
    model.seed = Some(seed);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_sizes() {
        let g = MaxMarginGrid::default();
        assert_eq!(g.c.len(), 11);
        assert_eq!(g.gamma.len(), 10);
        assert_eq!(g.points(Task::Classification).len(), 11 * 11);
        assert_eq!(g.points(Task::Regression).len(), 11 * 11 * 3);
    }

    #[test]
    fn tie_break_prefers_small_c_then_small_gamma() {
        let a = GridPoint {
            kernel: Kernel::Rbf { gamma: 0.5 },
            c: 1.0,
            epsilon: None,
        };
        let b = GridPoint {
            kernel: Kernel::Rbf { gamma: 0.25 },
            c: 2.0,
            epsilon: None,
        };
        let c = GridPoint {
            kernel: Kernel::Rbf { gamma: 0.25 },
            c: 1.0,
            epsilon: None,
        };
        assert!(a.precedes(&b));
        assert!(c.precedes(&a));
    }

    #[test]
    fn fold_and_label_errors() {
        let x: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let y = vec![1.0, -1.0, 1.0, -1.0, 1.0];
        let grid = MaxMarginGrid::default();
        assert!(matches!(
            train_max_margin(&x, &y, Task::Classification, &grid, 10, 1),
            Err(LearnerError::Folds { rows: 5, folds: 10 })
        ));
        assert_eq!(
            train_max_margin(&x, &[1.0; 5], Task::Classification, &grid, 2, 1),
            Err(LearnerError::SingleClass)
        );
    }

    #[test]
    fn best_point_comes_from_grid() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 * 0.7).sin(), (i as f64 * 0.3).cos()]).collect();
        let y: Vec<f64> = x.iter().map(|r| if r[0] * r[1] > 0.0 { 1.0 } else { -1.0 }).collect();
        let grid = MaxMarginGrid {
            c: vec![0.5, 8.0],
            gamma: vec![0.5, 4.0],
            epsilon: vec![],
            linear: true,
            rbf: true,
        };
        let res = cross_validate(&x, &y, Task::Classification, &grid, 5, 3).unwrap();
        assert_eq!(res.scores.len(), 6);
        assert!(grid.points(Task::Classification).contains(&res.best));
        assert_eq!(res, cross_validate(&x, &y, Task::Classification, &grid, 5, 3).unwrap());
    }
}
