use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use priorpol::eval::approx_randomization;
use priorpol::formulae::{prior_polarity_from_scores, FormulaVariant};
use priorpol::learners::{fit_point, stability_select, GridPoint, Kernel, SelectionConfig, Task};
use priorpol::rng::stream;
use priorpol_bench::{classification_rows, correctness, regression_rows, sense_lists};

fn formulae(c: &mut Criterion) {
    let entries = sense_lists(1000, 30, 1);
    let systems: Vec<FormulaVariant> = FormulaVariant::all().into_iter().filter(|f| !f.formula.is_random()).collect();
    c.bench_function("formulae/1000 entries x deterministic systems", |b| {
        b.iter(|| {
            let mut total = 0.0;
            for (p, q) in &entries {
                for fv in &systems {
                    total += prior_polarity_from_scores(p, q, fv.formula, fv.variant, None).unwrap().value;
                }
            }
            black_box(total)
        })
    });
}

fn smo(c: &mut Criterion) {
    let (x, y) = classification_rows(300, 27, 2);
    let svc = GridPoint { kernel: Kernel::Rbf { gamma: 0.1 }, c: 1.0, epsilon: None };
    c.bench_function("smo/classification 300x27", |b| {
        b.iter(|| fit_point(black_box(&x), &y, Task::Classification, &svc).unwrap())
    });
    let (x, y) = regression_rows(300, 27, 3);
    let svr = GridPoint { kernel: Kernel::Rbf { gamma: 0.1 }, c: 1.0, epsilon: Some(0.1) };
    c.bench_function("smo/regression 300x27", |b| {
        b.iter(|| fit_point(black_box(&x), &y, Task::Regression, &svr).unwrap())
    });
}

fn selection(c: &mut Criterion) {
    let (x, y) = regression_rows(300, 27, 4);
    let mut config = SelectionConfig::with_penalty(0.05);
    config.resamples = 100;
    c.bench_function("stability/100 resamples 300x27", |b| {
        b.iter(|| stability_select(black_box(&x), &y, &config, 4).unwrap())
    });
}

fn randomization(c: &mut Criterion) {
    let (a, b) = correctness(2500, 5);
    c.bench_function("approx randomization/2500 pairs x 10000", |bench| {
        bench.iter_batched(
            || stream(5, "bench/ar"),
            |mut rng| approx_randomization(&a, &b, 10_000, &mut rng).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = formulae, smo, selection, randomization
}
criterion_main!(benches);
