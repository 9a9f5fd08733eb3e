//! Synthetic inputs for the benchmarks.

use priorpol::rng::stream;
use rand::Rng;

/// `count` sense lists of 1..=max_senses senses with scores in [0, 1].
pub fn sense_lists(count: usize, max_senses: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut r = stream(seed, "bench/senses");
    (0..count)
        .map(|_| {
            let n = r.random_range(1..=max_senses);
            let pos: Vec<f64> = (0..n).map(|_| r.random::<f64>() * 0.5).collect();
            let neg = pos.iter().map(|p| r.random::<f64>() * (1.0 - p)).collect();
            (pos, neg)
        })
        .collect()
}

/// Rows of `d` uniform features; targets are a noisy sum of the first two.
pub fn regression_rows(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut r = stream(seed, "bench/rows");
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
    let y = x.iter().map(|row| row[0] + 0.5 * row[1] + 0.1 * r.random_range(-1.0..1.0)).collect();
    (x, y)
}

/// Regression rows with targets replaced by their sign.
pub fn classification_rows(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (x, y) = regression_rows(n, d, seed);
    (x, y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect())
}

/// Two correctness vectors of length `n`, the first right more often.
pub fn correctness(n: usize, seed: u64) -> (Vec<bool>, Vec<bool>) {
    let mut r = stream(seed, "bench/correct");
    let a = (0..n).map(|_| r.random_bool(0.75)).collect();
    let b = (0..n).map(|_| r.random_bool(0.7)).collect();
    (a, b)
}
