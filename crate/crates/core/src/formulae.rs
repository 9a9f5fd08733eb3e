//! Posterior-to-prior polarity formulae.
//!
//! Each two-sided formula is applied independently to the positive and the
//! negative score lists of a `lemma#PoS`, giving `(f_pos, f_neg)` with both
//! sides in `[0,1]`. A [`Variant`] then folds the pair into one signed score
//! in `[-1,1]`. `uni` and `rnd` produce a signed score directly.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::LemmaPosEntry;

#[derive(Debug, Error, PartialEq)]
pub enum FormulaError {
    #[error("score lists must be non-empty")]
    EmptyScores,
    #[error("score lists differ in length ({pos} positive, {neg} negative)")]
    LengthMismatch { pos: usize, neg: usize },
    #[error("score {0} outside [0,1]")]
    ScoreOutOfRange(f64),
    #[error("formula `{0}` needs a random generator")]
    MissingRng(Formula),
    #[error("formula `{0}` is signed and takes no variant")]
    UnexpectedVariant(Formula),
    #[error("formula `{0}` is two-sided and needs a variant")]
    MissingVariant(Formula),
    #[error("unknown formula `{0}`")]
    Unknown(String),
}

/// Aggregation formula identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    Fs,
    Mean,
    Max,
    Median,
    W1,
    W2,
    W1s,
    W2s,
    W1n,
    W2n,
    W1sn,
    W2sn,
    Uni,
    Uniw,
    Rnd,
    Swnrnd,
}

impl Formula {
    pub const ALL: [Formula; 16] = [
        Formula::Fs,
        Formula::Mean,
        Formula::Max,
        Formula::Median,
        Formula::W1,
        Formula::W2,
        Formula::W1s,
        Formula::W2s,
        Formula::W1n,
        Formula::W2n,
        Formula::W1sn,
        Formula::W2sn,
        Formula::Uni,
        Formula::Uniw,
        Formula::Rnd,
        Formula::Swnrnd,
    ];

    /// The thirteen deterministic formulae that produce `(f_pos, f_neg)`.
    pub const TWO_SIDED_DETERMINISTIC: [Formula; 13] = [
        Formula::Fs,
        Formula::Mean,
        Formula::Max,
        Formula::Median,
        Formula::W1,
        Formula::W2,
        Formula::W1s,
        Formula::W2s,
        Formula::W1n,
        Formula::W2n,
        Formula::W1sn,
        Formula::W2sn,
        Formula::Uniw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Formula::Fs => "fs",
            Formula::Mean => "mean",
            Formula::Max => "max",
            Formula::Median => "median",
            Formula::W1 => "w1",
            Formula::W2 => "w2",
            Formula::W1s => "w1s",
            Formula::W2s => "w2s",
            Formula::W1n => "w1n",
            Formula::W2n => "w2n",
            Formula::W1sn => "w1sn",
            Formula::W2sn => "w2sn",
            Formula::Uni => "uni",
            Formula::Uniw => "uniw",
            Formula::Rnd => "rnd",
            Formula::Swnrnd => "swnrnd",
        }
    }

    /// Signed formulae return one score and admit no variant.
    pub fn is_signed(self) -> bool {
        matches!(self, Formula::Uni | Formula::Rnd)
    }

    pub fn is_random(self) -> bool {
        matches!(self, Formula::Rnd | Formula::Swnrnd)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formula {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        Formula::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or(FormulaError::Unknown(s))
    }
}

/// How `(f_pos, f_neg)` becomes one signed score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Signed maximum: `f_pos` if `f_pos >= f_neg`, else `-f_neg`.
    M,
    /// Difference: `f_pos - f_neg`.
    D,
}

impl Variant {
    pub fn suffix(self) -> &'static str {
        match self {
            Variant::M => "m",
            Variant::D => "d",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FormulaOutput {
    TwoSided { pos: f64, neg: f64 },
    Signed(f64),
}

/// A prior polarity value with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorScore {
    pub value: f64,
    pub formula: Formula,
    pub variant: Option<Variant>,
}

fn validate(pos: &[f64], neg: &[f64]) -> Result<(), FormulaError> {
    if pos.is_empty() || neg.is_empty() {
        return Err(FormulaError::EmptyScores);
    }
    if pos.len() != neg.len() {
        return Err(FormulaError::LengthMismatch {
            pos: pos.len(),
            neg: neg.len(),
        });
    }
    if let Some(&bad) = pos
        .iter()
        .chain(neg)
        .find(|v| !(0.0..=1.0).contains(*v))
    {
        return Err(FormulaError::ScoreOutOfRange(bad));
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Series {
    Geometric,
    Harmonic,
}

/// Weighted mean with normalised geometric (1/2)^i or harmonic 1/i weights.
fn weighted(values: &[f64], series: Series) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut g = 1.0;
    for (i, v) in values.iter().enumerate() {
        let w = match series {
            Series::Geometric => {
                g *= 0.5;
                g
            }
            Series::Harmonic => 1.0 / (i + 1) as f64,
        };
        num += w * v;
        den += w;
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).clamp(0.0, 1.0)
    }
}

fn sorted_desc(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Drops senses scoring zero on both sides.
fn nonzero(pos: &[f64], neg: &[f64]) -> (Vec<f64>, Vec<f64>) {
    pos.iter()
        .zip(neg)
        .filter(|(p, n)| !(**p == 0.0 && **n == 0.0))
        .map(|(p, n)| (*p, *n))
        .unzip()
}

fn mean(values: &[f64]) -> f64 {
    (values.iter().sum::<f64>() / values.len() as f64).clamp(0.0, 1.0)
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn max(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

struct UniParts {
    pos: f64,
    neg: f64,
    pos_weight: f64,
    neg_weight: f64,
}

/// Means over the strongly positive / strongly negative sense sets.
fn uni_parts(pos: &[f64], neg: &[f64]) -> UniParts {
    let n = pos.len() as f64;
    let strong_pos: Vec<f64> = pos
        .iter()
        .zip(neg)
        .filter(|(p, q)| *p >= *q && **p > 0.0)
        .map(|(p, _)| *p)
        .collect();
    let strong_neg: Vec<f64> = pos
        .iter()
        .zip(neg)
        .filter(|(p, q)| *q >= *p && **q > 0.0)
        .map(|(_, q)| *q)
        .collect();
    let side = |v: &[f64]| if v.is_empty() { 0.0 } else { mean(v) };
    UniParts {
        pos: side(&strong_pos),
        neg: side(&strong_neg),
        pos_weight: strong_pos.len() as f64 / n,
        neg_weight: strong_neg.len() as f64 / n,
    }
}

fn two_sided(
    pos: &[f64],
    neg: &[f64],
    f: impl Fn(&[f64]) -> f64,
) -> FormulaOutput {
    FormulaOutput::TwoSided {
        pos: f(pos),
        neg: f(neg),
    }
}

/// Applies `formula` to the frequency-ordered score lists.
///
/// `rng` is required for `rnd` and `swnrnd` and ignored otherwise.
pub fn compute(
    formula: Formula,
    pos: &[f64],
    neg: &[f64],
    rng: Option<&mut dyn RngCore>,
) -> Result<FormulaOutput, FormulaError> {
    validate(pos, neg)?;
    let out = match formula {
        Formula::Fs => FormulaOutput::TwoSided {
            pos: pos[0],
            neg: neg[0],
        },
        Formula::Mean => two_sided(pos, neg, mean),
        Formula::Max => two_sided(pos, neg, max),
        Formula::Median => two_sided(pos, neg, median),
        Formula::W1 => two_sided(pos, neg, |v| weighted(v, Series::Geometric)),
        Formula::W2 => two_sided(pos, neg, |v| weighted(v, Series::Harmonic)),
        Formula::W1s => two_sided(pos, neg, |v| weighted(&sorted_desc(v), Series::Geometric)),
        Formula::W2s => two_sided(pos, neg, |v| weighted(&sorted_desc(v), Series::Harmonic)),
        Formula::W1n | Formula::W2n | Formula::W1sn | Formula::W2sn => {
            let series = match formula {
                Formula::W1n | Formula::W1sn => Series::Geometric,
                _ => Series::Harmonic,
            };
            let sort = matches!(formula, Formula::W1sn | Formula::W2sn);
            let (p, q) = nonzero(pos, neg);
            if sort {
                two_sided(&p, &q, |v| weighted(&sorted_desc(v), series))
            } else {
                two_sided(&p, &q, |v| weighted(v, series))
            }
        }
        Formula::Uniw => {
            let parts = uni_parts(pos, neg);
            FormulaOutput::TwoSided {
                pos: parts.pos,
                neg: parts.neg,
            }
        }
        Formula::Uni => {
            let u = uni_parts(pos, neg);
            let value = if u.pos > u.neg {
                u.pos
            } else if u.neg > u.pos {
                -u.neg
            } else if u.pos_weight > u.neg_weight {
                u.pos
            } else if u.neg_weight > u.pos_weight {
                -u.neg
            } else {
                0.0
            };
            FormulaOutput::Signed(value)
        }
        Formula::Rnd => {
            let rng = rng.ok_or(FormulaError::MissingRng(formula))?;
            FormulaOutput::Signed(rng.random_range(-1.0..=1.0))
        }
        Formula::Swnrnd => {
            let rng = rng.ok_or(FormulaError::MissingRng(formula))?;
            let j = rng.random_range(0..pos.len());
            FormulaOutput::TwoSided {
                pos: pos[j],
                neg: neg[j],
            }
        }
    };
    Ok(out)
}

/// Folds a two-sided result into one signed score.
pub fn map_variant(pos: f64, neg: f64, variant: Variant) -> f64 {
    match variant {
        Variant::M => {
            if pos >= neg {
                pos
            } else {
                -neg
            }
        }
        Variant::D => pos - neg,
    }
}

/// Prior polarity of one entry. `variant` must be given exactly when the
/// formula is two-sided.
pub fn prior_polarity(
    entry: &LemmaPosEntry,
    formula: Formula,
    variant: Option<Variant>,
    rng: Option<&mut dyn RngCore>,
) -> Result<PriorScore, FormulaError> {
    let (pos, neg) = entry.sense_vectors();
    prior_polarity_from_scores(&pos, &neg, formula, variant, rng)
}

pub fn prior_polarity_from_scores(
    pos: &[f64],
    neg: &[f64],
    formula: Formula,
    variant: Option<Variant>,
    rng: Option<&mut dyn RngCore>,
) -> Result<PriorScore, FormulaError> {
    match (formula.is_signed(), variant) {
        (true, Some(_)) => return Err(FormulaError::UnexpectedVariant(formula)),
        (false, None) => return Err(FormulaError::MissingVariant(formula)),
        _ => {}
    }
    let value = match compute(formula, pos, neg, rng)? {
        FormulaOutput::Signed(v) => v,
        FormulaOutput::TwoSided { pos, neg } => map_variant(pos, neg, variant.unwrap_or(Variant::M)),
    };
    Ok(PriorScore {
        value,
        formula,
        variant,
    })
}

/// A formula/variant pair naming one scoring system, e.g. `w2n_m` or `uni`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FormulaVariant {
    pub formula: Formula,
    pub variant: Option<Variant>,
}

impl FormulaVariant {
    pub fn new(formula: Formula, variant: Option<Variant>) -> Result<Self, FormulaError> {
        match (formula.is_signed(), variant) {
            (true, Some(_)) => Err(FormulaError::UnexpectedVariant(formula)),
            (false, None) => Err(FormulaError::MissingVariant(formula)),
            _ => Ok(FormulaVariant { formula, variant }),
        }
    }

    /// Every formula-variant pair, random baselines included (30 in total).
    pub fn all() -> Vec<FormulaVariant> {
        Formula::ALL
            .into_iter()
            .flat_map(|f| {
                if f.is_signed() {
                    vec![FormulaVariant {
                        formula: f,
                        variant: None,
                    }]
                } else {
                    [Variant::M, Variant::D]
                        .into_iter()
                        .map(|v| FormulaVariant {
                            formula: f,
                            variant: Some(v),
                        })
                        .collect()
                }
            })
            .collect()
    }
}

impl fmt::Display for FormulaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.variant {
            Some(v) => write!(f, "{}_{}", self.formula, v.suffix()),
            None => write!(f, "{}", self.formula),
        }
    }
}

impl FromStr for FormulaVariant {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        if let Ok(f) = s.parse::<Formula>() {
            if f.is_signed() {
                return FormulaVariant::new(f, None);
            }
            return Err(FormulaError::MissingVariant(f));
        }
        let (name, suffix) = s.rsplit_once('_').ok_or_else(|| FormulaError::Unknown(s.clone()))?;
        let variant = match suffix {
            "m" => Variant::M,
            "d" => Variant::D,
            _ => return Err(FormulaError::Unknown(s.clone())),
        };
        FormulaVariant::new(name.parse()?, Some(variant))
    }
}

/// Version tag written into feature exports.
pub const FEATURE_SCHEMA_VERSION: &str = "priorpol-features/1";

/// Ordered feature names shared by every vector of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub version: String,
    pub names: Vec<String>,
    /// Seed for the optional `swnrnd` columns.
    pub swnrnd_seed: Option<u64>,
}

impl Default for FeatureSchema {
    fn default() -> Self {
        FeatureSchema::standard()
    }
}

impl FeatureSchema {
    /// The 27 deterministic features: `m` and `d` for each two-sided
    /// deterministic formula, then `uni`.
    pub fn standard() -> Self {
        let mut names: Vec<String> = Formula::TWO_SIDED_DETERMINISTIC
            .into_iter()
            .flat_map(|f| [format!("{f}_m"), format!("{f}_d")])
            .collect();
        names.push(Formula::Uni.to_string());
        FeatureSchema {
            version: FEATURE_SCHEMA_VERSION.to_string(),
            names,
            swnrnd_seed: None,
        }
    }

    /// Standard schema plus `swnrnd_m`/`swnrnd_d` drawn from per-entry
    /// streams of `seed`.
    pub fn with_swnrnd(seed: u64) -> Self {
        let mut schema = FeatureSchema::standard();
        schema.names.push("swnrnd_m".into());
        schema.names.push("swnrnd_d".into());
        schema.swnrnd_seed = Some(seed);
        schema
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

/// Feature vector over raw score lists, following `schema`.
pub fn feature_vector_from_scores(
    pos: &[f64],
    neg: &[f64],
    schema: &FeatureSchema,
    key: &str,
) -> Result<FeatureVector, FormulaError> {
    let mut values = Vec::with_capacity(schema.len());
    for f in Formula::TWO_SIDED_DETERMINISTIC {
        match compute(f, pos, neg, None)? {
            FormulaOutput::TwoSided { pos, neg } => {
                values.push(map_variant(pos, neg, Variant::M));
                values.push(map_variant(pos, neg, Variant::D));
            }
            FormulaOutput::Signed(v) => values.push(v),
        }
    }
    if let FormulaOutput::Signed(v) = compute(Formula::Uni, pos, neg, None)? {
        values.push(v);
    }
    if let Some(seed) = schema.swnrnd_seed {
        let mut rng = crate::rng::stream(seed, &format!("swnrnd/{key}"));
        if let FormulaOutput::TwoSided { pos, neg } =
            compute(Formula::Swnrnd, pos, neg, Some(&mut rng))?
        {
            values.push(map_variant(pos, neg, Variant::M));
            values.push(map_variant(pos, neg, Variant::D));
        }
    }
    Ok(FeatureVector { values })
}

/// Standard 27-value feature vector of an entry.
pub fn feature_vector(entry: &LemmaPosEntry) -> FeatureVector {
    feature_vector_with(entry, &FeatureSchema::standard())
}

pub fn feature_vector_with(entry: &LemmaPosEntry, schema: &FeatureSchema) -> FeatureVector {
    let (pos, neg) = entry.sense_vectors();
    // entries built by the lexicon parser always satisfy the preconditions
    feature_vector_from_scores(&pos, &neg, schema, &entry.key())
        .expect("lexicon entries hold valid score lists")
}

/// Writes a tab-separated feature matrix: a `#schema=` line, a header row
/// and one row per `lemma#PoS`.
pub fn write_feature_matrix<W: Write>(
    mut out: W,
    schema: &FeatureSchema,
    rows: &[(String, FeatureVector)],
) -> io::Result<()> {
    writeln!(out, "#schema={}", schema.version)?;
    write!(out, "key")?;
    for name in &schema.names {
        write!(out, "\t{name}")?;
    }
    writeln!(out)?;
    for (key, fv) in rows {
        write!(out, "{key}")?;
        for v in &fv.values {
            write!(out, "\t{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
