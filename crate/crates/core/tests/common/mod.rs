//! Test-side oracles, written from the definitions and independent of the
//! library code paths.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Random sense lists: 1 to `max_senses` senses, scores that are exact zeros,
/// multiples of 1/8 (as in the lexicon files) or arbitrary reals in [0,1].
pub fn fuzz_entry(r: &mut impl Rng, max_senses: usize) -> (Vec<f64>, Vec<f64>) {
    let n = r.random_range(1..=max_senses);
    let draw = |r: &mut ChaCha20Rng| match r.random_range(0..3) {
        0 => 0.0,
        1 => r.random_range(0..=8) as f64 / 8.0,
        _ => r.random::<f64>(),
    };
    let mut inner = ChaCha20Rng::seed_from_u64(r.random());
    let pos = (0..n).map(|_| draw(&mut inner)).collect();
    let neg = (0..n).map(|_| draw(&mut inner)).collect();
    (pos, neg)
}

// ---------- formulae, transcribed literally ----------

fn weighted_sum(values: &[f64], weight: impl Fn(usize) -> f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut total_w = 0.0;
    for i in 1..=values.len() {
        total_w += weight(i);
    }
    let mut acc = 0.0;
    for i in 1..=values.len() {
        acc += weight(i) / total_w * values[i - 1];
    }
    acc
}

fn geometric(i: usize) -> f64 {
    0.5f64.powi(i as i32)
}

fn harmonic(i: usize) -> f64 {
    1.0 / i as f64
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

fn without_joint_zeros(p: &[f64], q: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..p.len() {
        if !(p[i] == 0.0 && q[i] == 0.0) {
            a.push(p[i]);
            b.push(q[i]);
        }
    }
    (a, b)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// `(f_pos, f_neg)` of a two-sided deterministic formula, by name.
pub fn oracle_two_sided(name: &str, p: &[f64], q: &[f64]) -> (f64, f64) {
    let n = p.len() as f64;
    match name {
        "fs" => (p[0], q[0]),
        "mean" => (p.iter().sum::<f64>() / n, q.iter().sum::<f64>() / n),
        "max" => (
            p.iter().cloned().fold(f64::MIN, f64::max),
            q.iter().cloned().fold(f64::MIN, f64::max),
        ),
        "median" => (median(p), median(q)),
        "w1" => (weighted_sum(p, geometric), weighted_sum(q, geometric)),
        "w2" => (weighted_sum(p, harmonic), weighted_sum(q, harmonic)),
        "w1s" => (weighted_sum(&sorted_desc(p), geometric), weighted_sum(&sorted_desc(q), geometric)),
        "w2s" => (weighted_sum(&sorted_desc(p), harmonic), weighted_sum(&sorted_desc(q), harmonic)),
        "w1n" | "w2n" | "w1sn" | "w2sn" => {
            let (a, b) = without_joint_zeros(p, q);
            let (a, b) = if name.contains('s') { (sorted_desc(&a), sorted_desc(&b)) } else { (a, b) };
            if name.starts_with("w1") {
                (weighted_sum(&a, geometric), weighted_sum(&b, geometric))
            } else {
                (weighted_sum(&a, harmonic), weighted_sum(&b, harmonic))
            }
        }
        "uniw" => {
            let (sp, sn) = strongly(p, q);
            (mean_over(p, &sp), mean_over(q, &sn))
        }
        other => panic!("no oracle for {other}"),
    }
}

fn strongly(p: &[f64], q: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let sp = (0..p.len()).filter(|&i| p[i] >= q[i] && p[i] > 0.0).collect();
    let sn = (0..p.len()).filter(|&i| q[i] >= p[i] && q[i] > 0.0).collect();
    (sp, sn)
}

fn mean_over(v: &[f64], idx: &[usize]) -> f64 {
    if idx.is_empty() {
        0.0
    } else {
        idx.iter().map(|&i| v[i]).sum::<f64>() / idx.len() as f64
    }
}

pub fn oracle_uni(p: &[f64], q: &[f64]) -> f64 {
    let (sp, sn) = strongly(p, q);
    let (fp, fn_) = (mean_over(p, &sp), mean_over(q, &sn));
    let (wp, wn) = (sp.len() as f64 / p.len() as f64, sn.len() as f64 / p.len() as f64);
    if fp > fn_ {
        fp
    } else if fn_ > fp {
        -fn_
    } else if wp > wn {
        fp
    } else if wn > wp {
        -fn_
    } else {
        0.0
    }
}

/// Sides within 1e-12 of each other are a tie, which goes to the positive
/// side: two transcriptions of the same weighted sum can round a true tie
/// apart by an ulp in either direction.
pub fn oracle_m(fp: f64, fn_: f64) -> f64 {
    if fp >= fn_ - 1e-12 {
        fp
    } else {
        -fn_
    }
}

pub fn oracle_d(fp: f64, fn_: f64) -> f64 {
    fp - fn_
}

pub const TWO_SIDED: [&str; 13] = [
    "fs", "mean", "max", "median", "w1", "w2", "w1s", "w2s", "w1n", "w2n", "w1sn", "w2sn", "uniw",
];

/// Expected values for every deterministic `formula_variant` name.
pub fn oracle_all(p: &[f64], q: &[f64]) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for name in TWO_SIDED {
        let (a, b) = oracle_two_sided(name, p, q);
        out.push((format!("{name}_m"), oracle_m(a, b)));
        out.push((format!("{name}_d"), oracle_d(a, b)));
    }
    out.push(("uni".into(), oracle_uni(p, q)));
    out
}

// ---------- statistics ----------

/// ln Gamma by the Lanczos approximation (g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Two-tailed p of a t statistic: 1 - 2 * integral of the t density over
/// [0, |t|], by composite Simpson on 200,000 panels.
pub fn t_two_tailed_quadrature(t: f64, df: f64) -> f64 {
    let log_norm = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    let density = |x: f64| (log_norm - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp();
    let b = t.abs();
    let panels = 200_000;
    let h = b / panels as f64;
    let mut s = density(0.0) + density(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * density(i as f64 * h);
    }
    let half = s * h / 3.0;
    (1.0 - 2.0 * half).max(0.0)
}

/// Exact permutation p: the fraction of all 2^n swap patterns whose
/// |difference in correct counts| reaches the observed one.
pub fn exhaustive_randomization(a: &[bool], b: &[bool]) -> f64 {
    let n = a.len();
    assert!(n <= 20);
    let count = |x: &[bool]| x.iter().filter(|v| **v).count() as i64;
    let observed = (count(a) - count(b)).abs();
    let mut hits = 0u64;
    for mask in 0u32..(1 << n) {
        let (mut ca, mut cb) = (0i64, 0i64);
        for i in 0..n {
            let (x, y) = if mask >> i & 1 == 1 { (b[i], a[i]) } else { (a[i], b[i]) };
            ca += x as i64;
            cb += y as i64;
        }
        if (ca - cb).abs() >= observed {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}

/// Kolmogorov-Smirnov distance of a sample from Uniform(0,1).
pub fn ks_uniform(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}

// ---------- linear algebra ----------

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Design with one informative column and `d - 1` noise columns, columns
/// standardized; `y = x[informative] + noise_sd * e`.
pub fn informative_fixture(
    n: usize,
    d: usize,
    informative: usize,
    noise_sd: f64,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut r = rng(seed);
    let mut normal = move || {
        // Box-Muller
        let u1: f64 = r.random::<f64>().max(1e-300);
        let u2: f64 = r.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| normal()).collect()).collect();
    for j in 0..d {
        let m = x.iter().map(|row| row[j]).sum::<f64>() / n as f64;
        let s = (x.iter().map(|row| (row[j] - m).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        for row in x.iter_mut() {
            row[j] = (row[j] - m) / s;
        }
    }
    let y = x.iter().map(|row| row[informative] + noise_sd * normal()).collect();
    (x, y)
}

pub fn fixture_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}
