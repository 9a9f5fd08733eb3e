use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::mean_std;
use super::significance::SignificanceResult;
use super::EvalError;
use crate::gold::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Mae,
    Accuracy,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Mae => "mae",
            Metric::Accuracy => "accuracy",
        }
    }

    /// True when larger values are better.
    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::Accuracy)
    }
}

/// One test-side prediction. For classification `target` is +1 / -1 and
/// `prediction` is the decision score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub split: usize,
    pub key: String,
    pub prediction: f64,
    pub target: f64,
}

impl InstanceOutcome {
    pub fn abs_error(&self) -> f64 {
        (self.prediction - self.target).abs()
    }

    pub fn correct(&self) -> bool {
        Label::from_score(self.prediction).sign() == self.target
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub system: String,
    pub metric: Metric,
    pub per_split: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation over splits.
    pub std: f64,
    /// Decision scores of exactly 0 (classification only).
    pub ties: usize,
    pub per_instance: Vec<InstanceOutcome>,
}

impl EvalReport {
    /// Aggregates outcomes per split. Splits without outcomes are skipped.
    pub fn from_outcomes(
        system: &str,
        metric: Metric,
        outcomes: Vec<InstanceOutcome>,
    ) -> Result<Self, EvalError> {
        if outcomes.is_empty() {
            return Err(EvalError::Empty);
        }
        let n_splits = outcomes.iter().map(|o| o.split).max().unwrap_or(0) + 1;
        let mut sums = vec![0.0; n_splits];
        let mut counts = vec![0usize; n_splits];
        for o in &outcomes {
            sums[o.split] += match metric {
                Metric::Mae => o.abs_error(),
                Metric::Accuracy => o.correct() as u8 as f64,
            };
            counts[o.split] += 1;
        }
        let per_split: Vec<f64> = sums
            .iter()
            .zip(&counts)
            .filter(|(_, c)| **c > 0)
            .map(|(s, c)| s / *c as f64)
            .collect();
        let (mean, std) = mean_std(&per_split);
        let ties = match metric {
            Metric::Accuracy => outcomes.iter().filter(|o| o.prediction == 0.0).count(),
            Metric::Mae => 0,
        };
        Ok(EvalReport {
            system: system.to_string(),
            metric,
            per_split,
            mean,
            std,
            ties,
            per_instance: outcomes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub a: String,
    pub b: String,
    pub result: SignificanceResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupRow {
    pub system: String,
    pub key: String,
    pub group: String,
    pub instances: usize,
    pub mean: f64,
    pub std: f64,
    pub reliable: bool,
}

/// Every result for one (gold dataset, lexicon version) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSet {
    pub dataset: String,
    pub lexicon: String,
    pub metric: Metric,
    pub instances: usize,
    pub reports: Vec<EvalReport>,
    /// Systems that could not be evaluated, with the reason.
    pub failures: Vec<(String, String)>,
    pub significance: Vec<PairResult>,
    pub subgroups: Vec<SubgroupRow>,
}

/// Worst first: MAE descending, accuracy ascending, then system name.
pub fn sort_for_table(reports: &mut [EvalReport]) {
    reports.sort_by(|x, y| {
        let ord = x.mean.total_cmp(&y.mean);
        let ord = if x.metric.higher_is_better() { ord } else { ord.reverse() };
        ord.then_with(|| x.system.cmp(&y.system))
    });
}

fn sorted(set: &ReportSet) -> Vec<EvalReport> {
    let mut rows = set.reports.clone();
    sort_for_table(&mut rows);
    rows
}

pub fn render_table_tsv(set: &ReportSet) -> String {
    let m = set.metric.name();
    let mut out = String::new();
    writeln!(out, "# dataset={} lexicon={} instances={}", set.dataset, set.lexicon, set.instances).unwrap();
    writeln!(out, "system\t{m}_mean\t{m}_std\tsplits\tties").unwrap();
    for r in sorted(set) {
        writeln!(out, "{}\t{:.6}\t{:.6}\t{}\t{}", r.system, r.mean, r.std, r.per_split.len(), r.ties).unwrap();
    }
    for (system, _) in &set.failures {
        writeln!(out, "{system}\tNA\tNA\t0\t0").unwrap();
    }
    out
}

pub fn render_table_text(set: &ReportSet) -> String {
    let m = set.metric.name();
    let rows = sorted(set);
    let width = rows
        .iter()
        .map(|r| r.system.len())
        .chain(set.failures.iter().map(|f| f.0.len()))
        .chain([6])
        .max()
        .unwrap();
    let mut out = String::new();
    writeln!(out, "{} / {} ({} instances)", set.dataset, set.lexicon, set.instances).unwrap();
    writeln!(out, "{:<width$}  {m}", "system").unwrap();
    for r in &rows {
        writeln!(out, "{:<width$}  {:.3} ± {:.3}", r.system, r.mean, r.std).unwrap();
    }
    for (system, reason) in &set.failures {
        writeln!(out, "{system:<width$}  failed: {reason}").unwrap();
    }
    if !set.significance.is_empty() {
        writeln!(out, "\nsignificance").unwrap();
        for p in &set.significance {
            let test = match p.result.test {
                super::SignificanceTest::PairedT => "t",
                super::SignificanceTest::ApproxRandomization => "ar",
            };
            let flag = if p.result.degenerate { " (degenerate)" } else { "" };
            writeln!(out, "{} vs {}  {test}  p={:.4}{flag}", p.a, p.b, p.result.p_value).unwrap();
        }
    }
    if !set.subgroups.is_empty() {
        writeln!(out, "\nsubgroups").unwrap();
        for s in &set.subgroups {
            let flag = if s.reliable { "" } else { " (unreliable)" };
            writeln!(
                out,
                "{} {}={} n={}  {:.3} ± {:.3}{flag}",
                s.system, s.key, s.group, s.instances, s.mean, s.std
            )
            .unwrap();
        }
    }
    out
}
