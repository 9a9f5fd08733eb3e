//! Acceptance suite: one PASS / FAIL / SKIP line per criterion. Criteria 8-10
//! need the public lexicon and gold files, located through the environment
//! variables PRIORPOL_SWN1, PRIORPOL_SWN3, PRIORPOL_ANEW, PRIORPOL_GI and
//! (optionally) PRIORPOL_LEMMA_MAP.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use common::*;
use priorpol::eval::{
    approx_randomization, compare_reports, make_splits, subgroup_eval, t_test_paired, EvalReport, Metric, ReportSet,
    SplitPlan, SubgroupKey,
};
use priorpol::formulae::{compute, map_variant, prior_polarity_from_scores, Formula, FormulaOutput, FormulaVariant};
use priorpol::learners::{
    choose_l1_penalty, fit_point, stability_select, train_kernel_regression, GridPoint, Kernel, KernelSpec,
    SelectionConfig, Task,
};
use priorpol::pipeline::{cmd_evaluate, load, GoldInput, LexiconInput, RunConfig};
use priorpol::gold::GoldKind;
use priorpol::{Pos, SwnVersion, Variant};
use rand::Rng;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Box<dyn FnOnce() -> Verdict>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

// 1
fn formula_oracle() -> Verdict {
    let start = Instant::now();
    let mut r = rng(1);
    let names: Vec<FormulaVariant> = oracle_all(&[0.5], &[0.5]).iter().map(|(n, _)| n.parse().unwrap()).collect();
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    for _ in 0..10_000 {
        let (p, q) = fuzz_entry(&mut r, 30);
        for (fv, (name, expected)) in names.iter().zip(oracle_all(&p, &q)) {
            let got = prior_polarity_from_scores(&p, &q, fv.formula, fv.variant, None).unwrap().value;
            let diff = (got - expected).abs();
            if diff > worst || diff.is_nan() {
                worst = diff;
                worst_at = name;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-12 && secs < 10.0,
        format!("10000 entries x {} systems, max |diff| {worst:.1e} ({worst_at}), {secs:.2} s", names.len()),
    )
}

// 2
fn cold_fixture() -> Verdict {
    let p = [0.0, 0.0, 0.0, 0.125, 0.625];
    let q = [0.75, 0.75, 0.0, 0.375, 0.0];
    let value = |f: Formula, v: Option<Variant>| prior_polarity_from_scores(&p, &q, f, v, None).unwrap().value;
    let w1_neg = match compute(Formula::W1, &p, &q, None).unwrap() {
        FormulaOutput::TwoSided { neg, .. } => neg,
        FormulaOutput::Signed(_) => f64::NAN,
    };
    let got = [
        ("fs_m", value(Formula::Fs, Some(Variant::M)), -0.75),
        ("mean_d", value(Formula::Mean, Some(Variant::D)), -0.225),
        ("median_d", value(Formula::Median, Some(Variant::D)), -0.375),
        ("max_d", value(Formula::Max, Some(Variant::D)), -0.125),
        ("uni", value(Formula::Uni, None), -0.625),
        ("w1 neg", w1_neg, (0.75 * 0.5 + 0.75 * 0.25 + 0.375 * 0.0625) / 0.96875),
    ];
    let bad: Vec<String> = got
        .iter()
        .filter(|(_, g, e)| (g - e).abs() > 1e-15)
        .map(|(n, g, e)| format!("{n}={g} (want {e})"))
        .collect();
    let detail = got.iter().map(|(n, g, _)| format!("{n}={g:.5}")).collect::<Vec<_>>().join(", ");
    check(bad.is_empty(), if bad.is_empty() { detail } else { bad.join(", ") })
}

// 3
fn sign_agreement() -> Verdict {
    let mut r = rng(3);
    let mut violations = 0usize;
    let mut checked = 0usize;
    for _ in 0..100_000 {
        let (p, q) = fuzz_entry(&mut r, 30);
        for f in Formula::TWO_SIDED_DETERMINISTIC {
            if let FormulaOutput::TwoSided { pos, neg } = compute(f, &p, &q, None).unwrap() {
                let (m, d) = (map_variant(pos, neg, Variant::M), map_variant(pos, neg, Variant::D));
                if d != 0.0 {
                    checked += 1;
                    if m.signum() != d.signum() {
                        violations += 1;
                    }
                }
            }
        }
    }
    check(violations == 0, format!("100000 entries, {checked} nonzero f_d values, {violations} disagreements"))
}

// 4
fn learner_sanity() -> Verdict {
    let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 * 0.7, ((i * 3) % 5) as f64]).collect();
    let y: Vec<f64> = (0..8).map(|i| (i as f64 * 1.3).cos()).collect();
    let model = train_kernel_regression(&x, &y, &[KernelSpec::new(Kernel::Rbf { gamma: 0.8 }, 1e-12)]).unwrap();
    let interp = model
        .predict(&x)
        .unwrap()
        .iter()
        .zip(&y)
        .map(|(p, t)| (p - t).abs())
        .fold(0.0, f64::max);

    let xor = vec![vec![1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0], vec![-1.0, 1.0]];
    let labels = vec![1.0, 1.0, -1.0, -1.0];
    let point = GridPoint {
        kernel: Kernel::Rbf { gamma: 1.0 },
        c: 100.0,
        epsilon: None,
    };
    let svc = fit_point(&xor, &labels, Task::Classification, &point).unwrap();
    let correct = svc
        .predict(&xor)
        .unwrap()
        .iter()
        .zip(&labels)
        .filter(|(p, t)| p.signum() == **t)
        .count();

    let train: Vec<Vec<f64>> = (0..=20).filter(|i| i % 4 != 1).map(|i| vec![i as f64 / 20.0]).collect();
    let held: Vec<Vec<f64>> = (0..=20).filter(|i| i % 4 == 1).map(|i| vec![i as f64 / 20.0]).collect();
    let ty: Vec<f64> = train.iter().map(|r| 2.0 * r[0]).collect();
    let point = GridPoint {
        kernel: Kernel::Linear { scale: 1.0 },
        c: 100.0,
        epsilon: Some(0.01),
    };
    let svr = fit_point(&train, &ty, Task::Regression, &point).unwrap();
    let svr_err = svr
        .predict(&held)
        .unwrap()
        .iter()
        .zip(&held)
        .map(|(p, r)| (p - 2.0 * r[0]).abs())
        .fold(0.0, f64::max);
    check(
        interp < 1e-6 && correct == 4 && svr_err < 0.05,
        format!("interpolation max err {interp:.1e}; XOR {correct}/4; y=2x held-out max err {svr_err:.4}"),
    )
}

// 5
fn significance_oracles() -> Verdict {
    let mut r = rng(5);
    let iterations = 20_000;
    let mut worst_excess: f64 = f64::NEG_INFINITY;
    for n in 2..=10 {
        for _ in 0..3 {
            let a: Vec<bool> = (0..n).map(|_| r.random_bool(0.6)).collect();
            let b: Vec<bool> = (0..n).map(|_| r.random_bool(0.4)).collect();
            let exact = exhaustive_randomization(&a, &b);
            let got = approx_randomization(&a, &b, iterations, &mut priorpol::rng::stream(n as u64, "acc5"))
                .unwrap()
                .p_value;
            let tol = 1.0 / (iterations as f64 + 1.0) + 4.0 * (exact * (1.0 - exact) / iterations as f64).sqrt();
            worst_excess = worst_excess.max((got - exact).abs() - tol);
        }
    }
    let mut t_worst: f64 = 0.0;
    for k in 0..20 {
        let n = 5 + k * 3;
        let a: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
        let b: Vec<f64> = a.iter().map(|v| v + 0.05 * (r.random::<f64>() - 0.3)).collect();
        let res = t_test_paired(&a, &b).unwrap();
        t_worst = t_worst.max((res.p_value - t_two_tailed_quadrature(res.statistic, n as f64 - 1.0)).abs());
    }
    check(
        worst_excess <= 0.0 && t_worst < 1e-6,
        format!(
            "AR vs 2^n enumeration (n=2..10, 27 fixtures): within tolerance (smallest margin {:.1e}); t-test vs quadrature max |dp| {t_worst:.1e}",
            -worst_excess
        ),
    )
}

// 6
const STRONG_PENALTY: f64 = 0.5;

fn stability() -> Verdict {
    // y identical to feature 3, nine standardized noise columns
    let (x, y) = informative_fixture(200, 10, 3, 0.0, 6);
    let config = SelectionConfig::with_penalty(STRONG_PENALTY);
    let sel = stability_select(&x, &y, &config, 6).unwrap();
    let noise_max = sel
        .frequencies
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != 3)
        .map(|(_, f)| *f)
        .fold(0.0, f64::max);

    // for reference only: the cross-validated penalty on the same data
    let cv = choose_l1_penalty(&x, &y, &[], 6).unwrap();
    let cv_sel = stability_select(&x, &y, &SelectionConfig::with_penalty(cv), 6).unwrap();
    let cv_noise = cv_sel.frequencies.iter().enumerate().filter(|(j, _)| *j != 3).map(|(_, f)| *f).fold(0.0, f64::max);
    check(
        config.resamples == 1000 && config.sample_fraction == 0.75 && sel.frequencies[3] >= 0.9 && noise_max < 0.25,
        format!(
            "penalty {STRONG_PENALTY}, 1000 resamples at 75%: informative {:.3}, max noise {noise_max:.3} (cross-validated penalty {cv:.2e} would give {:.3} / {cv_noise:.3})",
            sel.frequencies[3], cv_sel.frequencies[3]
        ),
    )
}

// 7
fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut config = RunConfig::from_path(&fixture_dir().join("run.toml")).unwrap();
    config.out = dir.path().to_path_buf();
    let snapshot = |d: &std::path::Path| -> BTreeMap<PathBuf, Vec<u8>> {
        walk(d).into_iter().map(|p| (p.strip_prefix(d).unwrap().to_path_buf(), std::fs::read(&p).unwrap())).collect()
    };
    cmd_evaluate(&config).unwrap();
    let first = snapshot(dir.path());
    std::fs::remove_dir_all(dir.path()).unwrap();
    cmd_evaluate(&config).unwrap();
    let second = snapshot(dir.path());
    let identical = first == second;

    let plan = |seed| SplitPlan::standard(seed);
    let s1 = make_splits(12, &plan(config.seed.unwrap())).unwrap();
    let s2 = make_splits(12, &plan(config.seed.unwrap() + 1)).unwrap();
    let changed = s1.iter().zip(&s2).any(|(a, b)| a.test != b.test);
    check(
        identical && changed,
        format!(
            "{} output files byte-identical across runs: {identical}; seed+1 changes split membership: {changed}",
            first.len()
        ),
    )
}

fn walk(dir: &std::path::Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

// ---------- dataset-dependent ----------

fn dataset_config() -> Option<RunConfig> {
    let var = |k: &str| std::env::var_os(k).map(PathBuf::from);
    let (swn1, swn3, anew, gi) = (
        var("PRIORPOL_SWN1")?,
        var("PRIORPOL_SWN3")?,
        var("PRIORPOL_ANEW")?,
        var("PRIORPOL_GI")?,
    );
    Some(RunConfig {
        seed: Some(20140421),
        lexicon: vec![
            LexiconInput { path: swn1, version: SwnVersion::Swn1 },
            LexiconInput { path: swn3, version: SwnVersion::Swn3 },
        ],
        gold: vec![
            GoldInput { path: anew, kind: GoldKind::Anew },
            GoldInput { path: gi, kind: GoldKind::Gi },
        ],
        lemma_map: var("PRIORPOL_LEMMA_MAP"),
        subgroups: vec![SubgroupKey::PosClass],
        ..RunConfig::default()
    })
}

const NO_DATA: &str = "public SentiWordNet/ANEW/GI files not supplied (set PRIORPOL_SWN1, PRIORPOL_SWN3, PRIORPOL_ANEW, PRIORPOL_GI)";

fn pipeline_counts(config: &RunConfig) -> Verdict {
    let ingested = match load(config) {
        Ok(i) => i,
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    let mut diffs = Vec::new();
    let mut cmp = |what: &str, got: usize, want: usize| {
        if got != want {
            diffs.push(format!("{what}: got {got}, target {want}"));
        }
    };
    for d in &ingested.datasets {
        let a = &d.alignment;
        match d.kind {
            GoldKind::Anew => {
                cmp("ANEW unaligned words", a.unaligned_words, 30);
                cmp("ANEW all-zero lemma#PoS", a.all_zero_filtered, 523);
                cmp("ANEW instances", a.kept, 961);
            }
            GoldKind::Gi => {
                cmp("GI sense-suffixed words", a.sense_suffixed_words, 1114);
                cmp("GI all-zero lemma#PoS", a.all_zero_filtered, 484);
                cmp("GI instances", a.kept, 2557);
            }
        }
    }
    check(diffs.is_empty(), if diffs.is_empty() { "all six counts match".into() } else { diffs.join("; ") })
}

fn find<'a>(set: &'a ReportSet, system: &str) -> Option<&'a EvalReport> {
    set.reports.iter().find(|r| r.system == system)
}

fn better(metric: Metric, a: f64, b: f64) -> bool {
    match metric {
        Metric::Mae => a < b,
        Metric::Accuracy => a > b,
    }
}

fn ordering_claims(sets: &[ReportSet], secs: f64) -> Verdict {
    let mut problems = Vec::new();
    let mut notes = Vec::new();
    let deterministic: Vec<String> = FormulaVariant::all()
        .into_iter()
        .filter(|f| !f.formula.is_random())
        .map(|f| f.to_string())
        .collect();
    let mut aggregate: BTreeMap<(String, String), f64> = BTreeMap::new();
    for set in sets {
        let tag = format!("{}/{}", set.dataset, set.lexicon);
        let Some(rnd) = find(set, "rnd") else {
            problems.push(format!("{tag}: rnd missing"));
            continue;
        };
        for name in &deterministic {
            let Some(r) = find(set, name) else { continue };
            let sig = compare_reports(r, rnd, 10_000, &mut priorpol::rng::stream(1, &format!("{tag}/{name}")));
            let p = sig.map(|s| s.p_value).unwrap_or(1.0);
            if !(better(set.metric, r.mean, rnd.mean) && p < 0.001) {
                problems.push(format!("{tag}: {name} does not beat rnd at p<0.001 (p={p:.4})"));
            }
        }
        let mean_all = deterministic.iter().filter_map(|n| find(set, n)).map(|r| r.mean).sum::<f64>()
            / deterministic.len() as f64;
        aggregate.insert((set.dataset.clone(), set.lexicon.clone()), mean_all);
        if set.dataset == "anew" && (rnd.mean - 0.652).abs() > 0.03 {
            problems.push(format!("{tag}: rnd MAE {:.3} vs target 0.652", rnd.mean));
        }
        if let Some(fs) = find(set, "svmfs") {
            let best = deterministic
                .iter()
                .filter_map(|n| find(set, n))
                .min_by(|a, b| {
                    let o = a.mean.total_cmp(&b.mean);
                    if set.metric == Metric::Mae { o } else { o.reverse() }
                })
                .unwrap();
            let target = match (set.dataset.as_str(), set.lexicon.as_str()) {
                ("anew", "swn1") => 0.366,
                ("anew", "swn3") => 0.333,
                ("gi", "swn1") => 0.743,
                _ => 0.792,
            };
            notes.push(format!("{tag} svmfs {:.3} (target {target}), best formula {} {:.3}", fs.mean, best.system, best.mean));
            if (fs.mean - target).abs() > 0.03 {
                problems.push(format!("{tag}: svmfs {:.3} outside target {target} +/- 0.03", fs.mean));
            }
            if set.dataset == "anew" && !better(set.metric, fs.mean, best.mean) {
                problems.push(format!("{tag}: svmfs does not beat best formula {}", best.system));
            }
        } else {
            problems.push(format!("{tag}: svmfs failed"));
        }
    }
    for ds in ["anew", "gi"] {
        let metric = if ds == "anew" { Metric::Mae } else { Metric::Accuracy };
        let (v1, v3) = (aggregate.get(&(ds.into(), "swn1".into())), aggregate.get(&(ds.into(), "swn3".into())));
        if let (Some(v1), Some(v3)) = (v1, v3) {
            if !better(metric, *v3, *v1) {
                problems.push(format!("{ds}: swn3 aggregate {v3:.3} not better than swn1 {v1:.3}"));
            }
        }
    }
    if secs > 1800.0 {
        problems.push(format!("runtime {secs:.0} s exceeds 30 min"));
    }
    notes.push(format!("runtime {secs:.0} s"));
    check(problems.is_empty(), if problems.is_empty() { notes.join("; ") } else { problems.join("; ") })
}

fn subgroup_claims(config: &RunConfig, sets: &[ReportSet]) -> Verdict {
    let ingested = match load(config) {
        Ok(i) => i,
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    let mut problems = Vec::new();
    let mut notes = Vec::new();
    let gi = ingested.datasets.iter().find(|d| d.kind == GoldKind::Gi).unwrap();
    let anew = ingested.datasets.iter().find(|d| d.kind == GoldKind::Anew).unwrap();
    let gi3 = sets.iter().find(|s| s.dataset == "gi" && s.lexicon == "swn3");
    let anew3 = sets.iter().find(|s| s.dataset == "anew" && s.lexicon == "swn3");
    match gi3.and_then(|s| find(s, "svmfs")) {
        Some(r) => {
            let groups = subgroup_eval(&gi.instances, r, SubgroupKey::PosClass, 60).unwrap();
            let adj = groups.iter().find(|g| g.group == Pos::Adjective.tag().to_string());
            match adj {
                Some(g) => {
                    notes.push(format!("GI adjectives {:.3} (target 0.829)", g.report.mean));
                    if (g.report.mean - 0.829).abs() > 0.03 {
                        problems.push(format!("adjective accuracy {:.3} outside 0.829 +/- 0.03", g.report.mean));
                    }
                }
                None => problems.push("no adjective subgroup".into()),
            }
        }
        None => problems.push("gi/swn3 svmfs missing".into()),
    }
    match anew3.and_then(|s| find(s, "svmfs")) {
        Some(r) => match subgroup_eval(&anew.instances, r, SubgroupKey::Gender, 60) {
            Ok(groups) => {
                let get = |n: &str| groups.iter().find(|g| g.group == n).map(|g| &g.report);
                if let (Some(m), Some(f)) = (get("male"), get("female")) {
                    notes.push(format!("male {:.3} vs female {:.3} (target 0.292 / 0.369)", m.mean, f.mean));
                    if (m.mean - 0.292).abs() > 0.03 || (f.mean - 0.369).abs() > 0.03 {
                        problems.push("gender MAE outside +/- 0.03".into());
                    }
                    let p = compare_reports(m, f, 0, &mut priorpol::rng::stream(0, "gender"))
                        .map(|s| s.p_value)
                        .unwrap_or(1.0);
                    if !(m.mean < f.mean && p < 0.001) {
                        problems.push(format!("male < female not significant (p={p:.4})"));
                    }
                } else {
                    problems.push("gender ratings missing for some instances".into());
                }
            }
            Err(e) => problems.push(format!("gender analysis unavailable: {e}")),
        },
        None => problems.push("anew/swn3 svmfs missing".into()),
    }
    check(problems.is_empty(), if problems.is_empty() { notes.join("; ") } else { problems.join("; ") })
}

fn main() {
    let mut checks: Vec<(u32, &str, Check)> = vec![
        (1, "formula oracle equivalence", Box::new(formula_oracle)),
        (2, "cold#a regression fixture", Box::new(cold_fixture)),
        (3, "f_m / f_d sign agreement", Box::new(sign_agreement)),
        (4, "learner sanity", Box::new(learner_sanity)),
        (5, "significance-test oracles", Box::new(significance_oracles)),
        (6, "stability selection", Box::new(stability)),
        (7, "determinism", Box::new(determinism)),
    ];
    match dataset_config() {
        None => {
            for (n, title) in [(8, "pipeline counts"), (9, "ordering claims"), (10, "subgroup reproduction")] {
                checks.push((n, title, Box::new(|| Verdict::Skip(NO_DATA.into()))));
            }
        }
        Some(config) => {
            let c8 = config.clone();
            checks.push((8, "pipeline counts", Box::new(move || pipeline_counts(&c8))));
            let dir = tempfile::tempdir().unwrap();
            let mut run = config.clone();
            run.out = dir.path().to_path_buf();
            let start = Instant::now();
            let result = cmd_evaluate(&run);
            let secs = start.elapsed().as_secs_f64();
            match result {
                Ok(out) => {
                    let sets = out.sets;
                    let sets9 = sets.clone();
                    checks.push((9, "ordering claims", Box::new(move || ordering_claims(&sets9, secs))));
                    checks.push((10, "subgroup reproduction", Box::new(move || subgroup_claims(&config, &sets))));
                }
                Err(e) => {
                    let msg = e.to_string();
                    let msg2 = msg.clone();
                    checks.push((9, "ordering claims", Box::new(move || Verdict::Fail(msg))));
                    checks.push((10, "subgroup reproduction", Box::new(move || Verdict::Fail(msg2))));
                }
            }
        }
    }

    let mut failed = 0;
    for (n, title, f) in checks {
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict::Fail(format!("panicked: {msg}"))
        });
        let (tag, detail) = match verdict {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("{tag} criterion {n:>2} ({title}): {detail}");
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
