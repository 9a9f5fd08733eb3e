//! Experimental protocol: repeated random splits, metrics, paired
//! significance tests, subgroup analysis and report tables.

mod metrics;
mod report;
mod significance;
mod splits;
mod subgroup;

pub use metrics::{accuracy, labels_from_scores, mae, mean_std};
pub use report::{
    render_table_text, render_table_tsv, sort_for_table, EvalReport, InstanceOutcome, Metric, PairResult,
    ReportSet, SubgroupRow,
};
pub use significance::{
    approx_randomization, compare_reports, t_test_paired, SignificanceResult, SignificanceTest,
};
pub use splits::{make_splits, Split, SplitPlan};
pub use subgroup::{subgroup_eval, SubgroupKey, SubgroupReport, DEFAULT_MIN_SUBGROUP};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
    #[error("no values to evaluate")]
    Empty,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("reports are not paired: {0}")]
    Unpaired(String),
}
