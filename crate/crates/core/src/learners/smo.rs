//! Sequential minimal optimisation for soft-margin duals.
//!
//! Both the C-classification dual and the epsilon-insensitive regression dual
//! are instances of
//!
//! ```text
//! min  1/2 a'Qa + p'a   s.t.  y'a = const,  0 <= a_t <= C
//! ```
//!
//! with `Q_st = y_s y_t K(s, t)`. Each iteration picks a maximal-violating
//! pair with second-order working set selection and solves the two-variable
//! subproblem analytically. Iteration stops once the KKT gap
//! `max_{I_up} -y G - min_{I_low} -y G` falls below the tolerance.

use super::LearnerError;

const TAU: f64 = 1e-12;

/// Kernel values for the training rows, possibly a subset of a larger
/// precomputed Gram matrix.
#[derive(Debug, Clone, Copy)]
pub struct GramView<'a> {
    data: &'a [f64],
    stride: usize,
    idx: Option<&'a [usize]>,
}

impl<'a> GramView<'a> {
    /// Full `n * n` row-major Gram matrix.
    pub fn full(data: &'a [f64], n: usize) -> Self {
        assert_eq!(data.len(), n * n, "Gram matrix must be n * n");
        GramView {
            data,
            stride: n,
            idx: None,
        }
    }

    /// Rows/columns `idx` of a full `n * n` Gram matrix.
    pub fn subset(data: &'a [f64], n: usize, idx: &'a [usize]) -> Self {
        assert_eq!(data.len(), n * n, "Gram matrix must be n * n");
        GramView {
            data,
            stride: n,
            idx: Some(idx),
        }
    }

    pub fn len(&self) -> usize {
        self.idx.map_or(self.stride, <[usize]>::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn get(&self, a: usize, b: usize) -> f64 {
        match self.idx {
            Some(idx) => self.data[idx[a] * self.stride + idx[b]],
            None => self.data[a * self.stride + b],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoOptions {
    pub tolerance: f64,
    /// `None` uses `max(1_000_000, 100 * variables)`.
    pub max_iter: Option<usize>,
}

impl Default for SmoOptions {
    fn default() -> Self {
        SmoOptions {
            tolerance: 1e-3,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    /// Expansion coefficient per training row: `y_i a_i` for classification,
    /// `a_i - a*_i` for regression.
    pub coefficients: Vec<f64>,
    /// Raw dual variables (length `n`, or `2n` for regression).
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    /// KKT gap at termination.
    pub kkt_violation: f64,
    pub converged: bool,
}

struct Problem<'a> {
    gram: GramView<'a>,
    /// Sign of each dual variable.
    y: Vec<f64>,
    /// Linear term.
    p: Vec<f64>,
    /// Data row of each dual variable.
    row: Vec<usize>,
    c: f64,
}

impl Problem<'_> {
    #[inline]
    fn q(&self, s: usize, t: usize) -> f64 {
        self.y[s] * self.y[t] * self.gram.get(self.row[s], self.row[t])
    }
}

struct Dual {
    alpha: Vec<f64>,
    bias: f64,
    iterations: usize,
    gap: f64,
    converged: bool,
}

fn solve(problem: &Problem, opts: &SmoOptions) -> Dual {
    let l = problem.y.len();
    let c = problem.c;
    let y = &problem.y;
    let mut alpha = vec![0.0; l];
    let mut grad = problem.p.clone();
    let qd: Vec<f64> = (0..l).map(|t| problem.q(t, t)).collect();
    let max_iter = opts.max_iter.unwrap_or_else(|| (100 * l).max(1_000_000));
    let is_upper = |a: f64| a >= c;
    let is_lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut gap;
    let mut converged = false;
    loop {
        // i: maximal -y G over I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..l {
            let v = -y[t] * grad[t];
            let up = if y[t] > 0.0 { !is_upper(alpha[t]) } else { !is_lower(alpha[t]) };
            if up && v >= gmax {
                gmax = v;
                i = t;
            }
        }
        // j: second-order choice over I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best_obj = f64::INFINITY;
        for t in 0..l {
            let low = if y[t] > 0.0 { !is_lower(alpha[t]) } else { !is_upper(alpha[t]) };
            if !low {
                continue;
            }
            let v = y[t] * grad[t];
            if v >= gmax2 {
                gmax2 = v;
            }
            if i == usize::MAX {
                continue;
            }
            let diff = gmax + v;
            if diff > 0.0 {
                let quad = qd[i] + qd[t] - 2.0 * y[i] * y[t] * problem.q(i, t);
                let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                if obj <= best_obj {
                    best_obj = obj;
                    j = t;
                }
            }
        }
        gap = gmax + gmax2;
        if gap < opts.tolerance || i == usize::MAX || j == usize::MAX {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            break;
        }
        iterations += 1;

        let qij = problem.q(i, j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (qd[i] + qd[j] + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qd[i] + qd[j] - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        for t in 0..l {
            grad[t] += problem.q(i, t) * di + problem.q(j, t) * dj;
        }
    }

    // bias from free variables, or the midpoint of the feasible interval
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..l {
        let yg = y[t] * grad[t];
        if is_upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if is_lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    };
    if !converged {
        log::warn!("SMO stopped after {iterations} iterations with KKT gap {gap:.3e}");
    }
    Dual {
        alpha,
        bias: -rho,
        iterations,
        gap,
        converged,
    }
}

fn check(gram: &GramView, y: &[f64], c: f64) -> Result<(), LearnerError> {
    if y.is_empty() {
        return Err(LearnerError::Empty);
    }
    if gram.len() != y.len() {
        return Err(LearnerError::Shape(format!(
            "Gram matrix covers {} rows, {} targets given",
            gram.len(),
            y.len()
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(LearnerError::Config(format!("C must be positive, got {c}")));
    }
    Ok(())
}

/// Soft-margin classification dual. Labels must be -1 or +1 and both must
/// occur.
pub fn solve_svc(gram: GramView, labels: &[f64], c: f64, opts: &SmoOptions) -> Result<SmoSolution, LearnerError> {
    check(&gram, labels, c)?;
    if let Some(bad) = labels.iter().find(|v| **v != 1.0 && **v != -1.0) {
        return Err(LearnerError::BadLabel(*bad));
    }
    if labels.iter().all(|v| *v == labels[0]) {
        return Err(LearnerError::SingleClass);
    }
    let n = labels.len();
    let problem = Problem {
        gram,
        y: labels.to_vec(),
        p: vec![-1.0; n],
        row: (0..n).collect(),
        c,
    };
    let dual = solve(&problem, opts);
    Ok(SmoSolution {
        coefficients: dual.alpha.iter().zip(labels).map(|(a, y)| a * y).collect(),
        alpha: dual.alpha,
        bias: dual.bias,
        iterations: dual.iterations,
        kkt_violation: dual.gap,
        converged: dual.converged,
    })
}

/// Epsilon-insensitive regression dual over `2n` variables.
pub fn solve_svr(
    gram: GramView,
    targets: &[f64],
    c: f64,
    epsilon: f64,
    opts: &SmoOptions,
) -> Result<SmoSolution, LearnerError> {
    check(&gram, targets, c)?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(LearnerError::Config(format!("epsilon must be non-negative, got {epsilon}")));
    }
    let n = targets.len();
    let mut y = vec![1.0; n];
    y.extend(std::iter::repeat_n(-1.0, n));
    let p: Vec<f64> = targets
        .iter()
        .map(|t| epsilon - t)
        .chain(targets.iter().map(|t| epsilon + t))
        .collect();
    let problem = Problem {
        gram,
        y,
        p,
        row: (0..n).chain(0..n).collect(),
        c,
    };
    let dual = solve(&problem, opts);
    Ok(SmoSolution {
        coefficients: (0..n).map(|i| dual.alpha[i] - dual.alpha[i + n]).collect(),
        alpha: dual.alpha,
        bias: dual.bias,
        iterations: dual.iterations,
        kkt_violation: dual.gap,
        converged: dual.converged,
    })
}
