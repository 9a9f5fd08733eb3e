use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::rng::stream;

/// Repeated random train/test partitioning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_fraction: f64,
    pub repeats: usize,
    pub master_seed: u64,
}

impl SplitPlan {
    /// 70% training, 5 repeats.
    pub fn standard(master_seed: u64) -> Self {
        SplitPlan {
            train_fraction: 0.7,
            repeats: 5,
            master_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub index: usize,
    /// Instance indices, ascending.
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Minimum number of instances accepted by [`make_splits`].
pub const MIN_INSTANCES: usize = 10;

/// Split `i` shuffles `0..n` with stream `split/i` of the master seed and
/// puts the first `round(fraction * n)` indices in the training side.
pub fn make_splits(n: usize, plan: &SplitPlan) -> Result<Vec<Split>, EvalError> {
    if n < MIN_INSTANCES {
        return Err(EvalError::Config(format!(
            "{n} instances; at least {MIN_INSTANCES} are needed for splitting"
        )));
    }
    if !(plan.train_fraction > 0.0 && plan.train_fraction < 1.0) {
        return Err(EvalError::Config(format!(
            "train fraction must lie in (0, 1), got {}",
            plan.train_fraction
        )));
    }
    if plan.repeats == 0 {
        return Err(EvalError::Config("at least one repeat is required".into()));
    }
    let n_train = ((plan.train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    Ok((0..plan.repeats)
        .map(|index| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut stream(plan.master_seed, &format!("split/{index}")));
            let mut train = order[..n_train].to_vec();
            let mut test = order[n_train..].to_vec();
            train.sort_unstable();
            test.sort_unstable();
            Split { index, train, test }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventy_thirty_partition() {
        let splits = make_splits(100, &SplitPlan::standard(1)).unwrap();
        assert_eq!(splits.len(), 5);
        for s in &splits {
            assert_eq!((s.train.len(), s.test.len()), (70, 30));
            let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..100).collect::<Vec<_>>());
        }
    }

    #[test]
    fn reproducible_and_distinct() {
        let a = make_splits(100, &SplitPlan::standard(1)).unwrap();
        assert_eq!(a, make_splits(100, &SplitPlan::standard(1)).unwrap());
        assert_ne!(a[0].test, a[1].test);
        let other = make_splits(100, &SplitPlan::standard(2)).unwrap();
        assert_ne!(a[0].test, other[0].test);
        // split i does not depend on how many repeats are requested
        let plan = SplitPlan {
            repeats: 2,
            ..SplitPlan::standard(1)
        };
        assert_eq!(make_splits(100, &plan).unwrap()[1], a[1]);
    }

    #[test]
    fn too_few_instances() {
        assert!(matches!(make_splits(9, &SplitPlan::standard(1)), Err(EvalError::Config(_))));
    }
}
