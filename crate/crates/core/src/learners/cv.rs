use rand::seq::SliceRandom;
use rand::Rng;

use super::LearnerError;

/// Assignment of rows to cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Folds {
    pub k: usize,
    pub assignment: Vec<usize>,
}

impl Folds {
    /// `(train, test)` row indices for fold `f`, each in ascending order.
    pub fn split(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.assignment.len()).partition(|i| self.assignment[*i] != f)
    }
}

/// Shuffles rows into `k` folds. With `strata`, each distinct value is dealt
/// round-robin so every fold receives a proportional share.
pub fn fold_assignment<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    strata: Option<&[f64]>,
    rng: &mut R,
) -> Result<Folds, LearnerError> {
    if k < 2 || n < k {
        return Err(LearnerError::Folds { rows: n, folds: k });
    }
    let mut assignment = vec![0; n];
    match strata {
        None => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            for (pos, i) in order.into_iter().enumerate() {
                assignment[i] = pos % k;
            }
        }
        Some(labels) => {
            if labels.len() != n {
                return Err(LearnerError::Shape("strata length differs from row count".into()));
            }
            let mut classes: Vec<f64> = labels.to_vec();
            classes.sort_by(f64::total_cmp);
            classes.dedup();
            let mut dealt = 0;
            for class in classes {
                let mut members: Vec<usize> = (0..n).filter(|i| labels[*i] == class).collect();
                members.shuffle(rng);
                for i in members {
                    assignment[i] = dealt % k;
                    dealt += 1;
                }
            }
        }
    }
    Ok(Folds { k, assignment })
}
