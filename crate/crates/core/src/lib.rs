//! Prior polarity toolkit.
//!
//! Reads sense-level sentiment lexica in the SentiWordNet TSV layout, derives
//! word-level (prior) polarity scores with a family of aggregation formulae,
//! blends those scores with kernel learners and evaluates everything against
//! human-rated gold standards with repeated random splits and paired
//! significance tests.
//!
//! The crate is organised bottom-up:
//!
//! * [`lexicon`]: parsing and lookup of sense-scored lexica.
//! * [`gold`]: ANEW-style valence ratings, General-Inquirer-style labels and
//!   their alignment to `lemma#PoS` entries.
//! * [`formulae`]: posterior-to-prior aggregation formulae and feature vectors.
//! * [`learners`]: z-scoring, kernel regression, max-margin solvers, grid
//!   search and stability selection.
//! * [`eval`]: splits, metrics, significance tests, subgroup analysis and
//!   report tables.
//! * [`pipeline`]: configuration-driven end-to-end runs used by the CLI.

pub mod eval;
pub mod formulae;
pub mod gold;
pub mod learners;
pub mod lexicon;
pub mod pipeline;
pub mod rng;

pub use formulae::{FeatureSchema, FeatureVector, Formula, FormulaOutput, PriorScore, Variant};
pub use gold::{AlignmentReport, AnewRecord, GiRecord, GoldInstance, Label};
pub use lexicon::{Lexicon, LemmaPosEntry, ParseSummary, Pos, SenseEntry, SwnVersion};

/// Toolkit version embedded in manifests and serialized models.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
