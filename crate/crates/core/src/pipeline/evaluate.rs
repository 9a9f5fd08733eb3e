use rayon::prelude::*;

use super::config::{LearnerKind, LearnerSettings, RunConfig, SystemSpec};
use super::{instance_features, instance_scores, load, output, Dataset, PipelineError};
use crate::eval::{
    compare_reports, make_splits, render_table_text, subgroup_eval, EvalReport, InstanceOutcome,
    Metric, PairResult, ReportSet, Split, SubgroupKey, SubgroupRow,
};
use crate::formulae::{prior_polarity_from_scores, FeatureSchema};
use crate::gold::GoldKind;
use crate::learners::{
    choose_l1_penalty, default_kernel_candidates, stability_select, train_kernel_regression_with,
    train_max_margin, zscore_apply, zscore_fit, KernelRegressionOptions, Preprocess, SelectionConfig, Task,
};
use crate::lexicon::{Lexicon, SwnVersion};
use crate::rng::{derive_seed, stream};

/// Inputs of one (dataset, lexicon version) table.
pub struct Table<'a> {
    pub dataset: GoldKind,
    pub lexicon: &'a Lexicon,
    pub keys: Vec<String>,
    pub scores: Vec<(Vec<f64>, Vec<f64>)>,
    pub features: Vec<Vec<f64>>,
    pub feature_names: Vec<String>,
    pub targets: Vec<f64>,
    pub metric: Metric,
}

impl<'a> Table<'a> {
    pub fn new(dataset: &Dataset, lexicon: &'a Lexicon) -> Self {
        let schema = FeatureSchema::standard();
        let mut t = Table {
            dataset: dataset.kind,
            lexicon,
            keys: Vec::new(),
            scores: Vec::new(),
            features: Vec::new(),
            feature_names: schema.names.clone(),
            targets: Vec::new(),
            metric: match dataset.kind {
                GoldKind::Anew => Metric::Mae,
                GoldKind::Gi => Metric::Accuracy,
            },
        };
        for inst in &dataset.instances {
            let target = match dataset.kind {
                GoldKind::Anew => inst.target_real,
                GoldKind::Gi => inst.target_class.map(|l| l.sign()),
            };
            let Some(target) = target else {
                log::warn!("{} has no target and is left out", inst.key());
                continue;
            };
            t.keys.push(inst.key());
            t.scores.push(instance_scores(lexicon, inst));
            t.features.push(instance_features(lexicon, inst, &schema).values);
            t.targets.push(target);
        }
        t
    }

    fn version(&self) -> SwnVersion {
        self.lexicon.version()
    }

    fn stream_name(&self, what: &str, split: usize) -> String {
        format!("{what}/{}/{}/{split}", self.dataset, self.version())
    }

    fn outcome(&self, split: usize, i: usize, prediction: f64) -> InstanceOutcome {
        InstanceOutcome {
            split,
            key: self.keys[i].clone(),
            prediction,
            target: self.targets[i],
        }
    }
}

fn formula_outcomes(
    table: &Table,
    spec: crate::formulae::FormulaVariant,
    split: &Split,
    seed: u64,
) -> Result<Vec<InstanceOutcome>, String> {
    split
        .test
        .iter()
        .map(|&i| {
            let (pos, neg) = &table.scores[i];
            let value = if spec.formula.is_random() {
                let name = format!("baseline/{spec}/{}/{}", table.stream_name("split", split.index), table.keys[i]);
                let mut rng = stream(seed, &name);
                prior_polarity_from_scores(pos, neg, spec.formula, spec.variant, Some(&mut rng))
            } else {
                prior_polarity_from_scores(pos, neg, spec.formula, spec.variant, None)
            }
            .map_err(|e| e.to_string())?
            .value;
            Ok(table.outcome(split.index, i, value))
        })
        .collect()
}

fn learner_outcomes(
    table: &Table,
    kind: LearnerKind,
    split: &Split,
    settings: &LearnerSettings,
    grid: &crate::learners::MaxMarginGrid,
    seed: u64,
) -> Result<Vec<InstanceOutcome>, String> {
    let task = match table.metric {
        Metric::Mae => Task::Regression,
        Metric::Accuracy => Task::Classification,
    };
    let x: Vec<Vec<f64>> = split.train.iter().map(|&i| table.features[i].clone()).collect();
    let y: Vec<f64> = split.train.iter().map(|&i| table.targets[i]).collect();
    let zscore = zscore_fit(&x).map_err(|e| e.to_string())?;
    let z = zscore_apply(&zscore, &x).map_err(|e| e.to_string())?;

    let mask = if kind.selects_features() {
        let penalty = choose_l1_penalty(&z, &y, &[], derive_seed(seed, &table.stream_name("selection/penalty", split.index)))
            .map_err(|e| e.to_string())?;
        let config = SelectionConfig {
            sample_fraction: settings.sample_fraction,
            threshold: settings.selection_threshold,
            resamples: settings.resamples,
            l1_penalty: penalty,
        };
        let sel = stability_select(&z, &y, &config, derive_seed(seed, &table.stream_name("selection", split.index)))
            .map_err(|e| e.to_string())?;
        let mut mask = sel.mask.clone();
        if !mask.iter().any(|m| *m) {
            // keep the most frequently selected feature (first on ties)
            let best = (0..mask.len())
                .fold(0, |b, j| if sel.frequencies[j] > sel.frequencies[b] { j } else { b });
            log::warn!("no feature passed the selection threshold; keeping {}", table.feature_names[best]);
            mask[best] = true;
        }
        mask
    } else {
        vec![true; table.feature_names.len()]
    };
    let preprocess = Preprocess {
        feature_names: table.feature_names.clone(),
        zscore: Some(zscore),
        feature_mask: mask,
    };
    let reduced = preprocess.transform(&x).map_err(|e| e.to_string())?;
    let model = match kind {
        LearnerKind::Svm | LearnerKind::SvmFs => train_max_margin(
            &reduced,
            &y,
            task,
            grid,
            settings.folds,
            derive_seed(seed, &table.stream_name("learner/grid", split.index)),
        ),
        LearnerKind::Gp | LearnerKind::GpFs => train_kernel_regression_with(
            &reduced,
            &y,
            &default_kernel_candidates(),
            KernelRegressionOptions { center_targets: true },
        ),
    }
    .map_err(|e| e.to_string())?
    .with_preprocess(preprocess);
    let test: Vec<Vec<f64>> = split.test.iter().map(|&i| table.features[i].clone()).collect();
    let predictions = model.predict(&test).map_err(|e| e.to_string())?;
    Ok(split
        .test
        .iter()
        .zip(predictions)
        .map(|(&i, p)| table.outcome(split.index, i, p))
        .collect())
}

/// Evaluates `systems` on every split of one table. Systems that fail on any
/// split are listed in `failures` instead of `reports`; kernel regression is
/// omitted from classification tables.
pub fn evaluate_table(
    table: &Table,
    systems: &[SystemSpec],
    config: &RunConfig,
) -> Result<ReportSet, PipelineError> {
    let seed = config.seed()?;
    let applicable: Vec<SystemSpec> = systems
        .iter()
        .copied()
        .filter(|s| {
            let ok = !(table.metric == Metric::Accuracy
                && matches!(s, SystemSpec::Learner(LearnerKind::Gp | LearnerKind::GpFs)));
            if !ok {
                log::info!("{} is regression only; omitted from {}", s.name(), table.dataset);
            }
            ok
        })
        .collect();
    let systems = &applicable[..];
    let splits = make_splits(table.keys.len(), &config.split_plan()?)
        .map_err(|e| PipelineError::Config(format!("{} / {}: {e}", table.dataset, table.version())))?;
    let grid = config.learner.grid.grid();
    let jobs: Vec<(usize, usize)> = (0..systems.len())
        .flat_map(|s| (0..splits.len()).map(move |k| (s, k)))
        .collect();
    let results: Vec<Result<Vec<InstanceOutcome>, String>> = jobs
        .par_iter()
        .map(|&(s, k)| match systems[s] {
            SystemSpec::Formula(fv) => formula_outcomes(table, fv, &splits[k], seed),
            SystemSpec::Learner(l) => learner_outcomes(table, l, &splits[k], &config.learner, &grid, seed),
        })
        .collect();

    let mut set = ReportSet {
        dataset: table.dataset.to_string(),
        lexicon: table.version().to_string(),
        metric: table.metric,
        instances: table.keys.len(),
        reports: Vec::new(),
        failures: Vec::new(),
        significance: Vec::new(),
        subgroups: Vec::new(),
    };
    let mut results = results.into_iter();
    for spec in systems {
        let name = spec.name();
        let mut outcomes = Vec::new();
        let mut error = None;
        for r in results.by_ref().take(splits.len()) {
            match r {
                Ok(o) => outcomes.extend(o),
                Err(e) => {
                    error.get_or_insert(e);
                }
            }
        }
        match error {
            None => set.reports.push(
                EvalReport::from_outcomes(&name, table.metric, outcomes)
                    .map_err(|e| PipelineError::Config(e.to_string()))?,
            ),
            Some(e) => {
                log::warn!("{} / {}: {name} failed: {e}", table.dataset, table.version());
                set.failures.push((name, e));
            }
        }
    }
    Ok(set)
}

/// Resolves `a:b` pairs against the systems present in `set`; `*` on the
/// left expands to every other system. Unknown names are skipped.
fn resolve_pairs(set: &ReportSet, pairs: &[String]) -> Result<Vec<(usize, usize)>, PipelineError> {
    let index = |name: &str| set.reports.iter().position(|r| r.system == name);
    let mut out = Vec::new();
    for p in pairs {
        let (a, b) = p
            .split_once(':')
            .ok_or_else(|| PipelineError::Config(format!("pair {p:?} is not of the form a:b")))?;
        let Some(ib) = index(b.trim()) else {
            log::info!("pair {p}: {b} was not evaluated on {} / {}", set.dataset, set.lexicon);
            continue;
        };
        if a.trim() == "*" {
            let mut seen = std::collections::BTreeSet::new();
            for (ia, r) in set.reports.iter().enumerate() {
                if r.system != set.reports[ib].system && seen.insert(r.system.clone()) {
                    out.push((ia, ib));
                }
            }
        } else if let Some(ia) = index(a.trim()) {
            out.push((ia, ib));
        } else {
            log::info!("pair {p}: {a} was not evaluated on {} / {}", set.dataset, set.lexicon);
        }
    }
    Ok(out)
}

pub(crate) fn add_significance(set: &mut ReportSet, config: &RunConfig) -> Result<(), PipelineError> {
    let seed = config.seed()?;
    let mut results = Vec::new();
    for (a, b) in resolve_pairs(set, &config.pairs)? {
        let (ra, rb) = (&set.reports[a], &set.reports[b]);
        let name = format!("significance/{}/{}/{}/{}", set.dataset, set.lexicon, ra.system, rb.system);
        let result = compare_reports(ra, rb, config.learner.ar_iterations, &mut stream(seed, &name))
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        results.push(PairResult {
            a: ra.system.clone(),
            b: rb.system.clone(),
            result,
        });
    }
    set.significance = results;
    Ok(())
}

fn add_subgroups(set: &mut ReportSet, dataset: &Dataset, config: &RunConfig) -> Result<(), PipelineError> {
    for &key in &config.subgroups {
        if key == SubgroupKey::Gender && dataset.kind == GoldKind::Gi {
            log::warn!("gender subgroups need real-valued targets; skipped for gi");
            continue;
        }
        for report in &set.reports {
            let groups = subgroup_eval(&dataset.instances, report, key, config.learner.min_subgroup)
                .map_err(|e| PipelineError::Config(format!("{} / {}: {e}", set.dataset, set.lexicon)))?;
            for g in groups {
                set.subgroups.push(SubgroupRow {
                    system: report.system.clone(),
                    key: key.name().to_string(),
                    group: g.group,
                    instances: g.instances,
                    mean: g.report.mean,
                    std: g.report.std,
                    reliable: g.reliable,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug)]
pub struct EvaluateOutcome {
    pub sets: Vec<ReportSet>,
    /// Human-readable tables of every set.
    pub text: String,
}

/// Runs ingest in memory, evaluates every table, and writes
/// `reports/<kind>_<version>.json` plus the rendered tables.
pub fn cmd_evaluate(config: &RunConfig) -> Result<EvaluateOutcome, PipelineError> {
    let ingested = load(config)?;
    let systems = config.systems()?;
    let mut sets = Vec::new();
    for dataset in &ingested.datasets {
        for lexicon in ingested.lexica.values() {
            let table = Table::new(dataset, lexicon);
            let mut set = evaluate_table(&table, &systems, config)?;
            add_significance(&mut set, config)?;
            add_subgroups(&mut set, dataset, config)?;
            sets.push(set);
        }
    }
    if sets.iter().all(|s| s.reports.is_empty()) {
        return Err(PipelineError::AllFailed);
    }
    let mut text = String::new();
    for set in &sets {
        let stem = format!("{}_{}", set.dataset, set.lexicon);
        super::write_json(&config.out.join("reports").join(format!("{stem}.json")), set)?;
        output::write_tables(&config.out, &stem, set)?;
        text.push_str(&render_table_text(set));
        text.push('\n');
    }
    output::write_manifest(config, &["evaluate"])?;
    Ok(EvaluateOutcome { sets, text })
}

/// Recomputes the configured pairs over stored reports and writes
/// `significance/<kind>_<version>.tsv`.
pub fn cmd_significance(config: &RunConfig) -> Result<String, PipelineError> {
    let mut text = String::new();
    for (stem, mut set) in output::read_report_sets(&config.out)? {
        add_significance(&mut set, config)?;
        let mut tsv = String::from("a\tb\ttest\tstatistic\tp_value\tn\tdegenerate\n");
        for p in &set.significance {
            let test = serde_json::to_value(p.result.test).expect("enum serializes");
            tsv.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                p.a,
                p.b,
                test.as_str().unwrap_or_default(),
                p.result.statistic,
                p.result.p_value,
                p.result.n,
                p.result.degenerate
            ));
        }
        super::write_text(&config.out.join("significance").join(format!("{stem}.tsv")), &tsv)?;
        text.push_str(&format!("# {stem}\n{tsv}"));
    }
    Ok(text)
}
