//! End-to-end runs driven by a [`RunConfig`]: ingest, feature export,
//! evaluation, significance testing and report rendering. Every output is a
//! function of the configuration, the input files and the master seed.

mod config;
mod evaluate;
mod output;

pub use config::{
    expand_systems, GoldInput, GridSize, LearnerKind, LearnerSettings, LexiconInput, RunConfig, SplitSettings,
    SystemSpec,
};
pub use evaluate::{cmd_evaluate, cmd_significance, evaluate_table, EvaluateOutcome, Table};
pub use output::{cmd_report, read_report_sets, InputDigest, Manifest, EMPTY_TABLE};

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::formulae::{feature_vector_from_scores, write_feature_matrix, FeatureSchema, FeatureVector};
use crate::gold::{
    align, parse_anew, parse_gi, write_instances, AlignmentReport, GoldInstance, GoldKind, GoldParseSummary,
    GoldRecords, LemmaMap,
};
use crate::lexicon::{Lexicon, ParseSummary, SwnVersion};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("every system failed to evaluate")]
    AllFailed,
    #[error("corrupt report {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

impl PipelineError {
    pub(crate) fn input(path: &Path, err: impl std::fmt::Display) -> Self {
        PipelineError::Input {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }

    /// Process exit code: 2 input or configuration error, 3 total
    /// evaluation failure, 4 corrupt report.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Input { .. } | PipelineError::Config(_) => 2,
            PipelineError::AllFailed => 3,
            PipelineError::Corrupt { .. } => 4,
        }
    }
}

/// One aligned gold corpus.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub kind: GoldKind,
    pub instances: Vec<GoldInstance>,
    pub parse: GoldParseSummary,
    pub alignment: AlignmentReport,
}

/// Loaded lexica (keyed by version) and aligned gold corpora.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub lexica: BTreeMap<SwnVersion, Lexicon>,
    pub lexicon_summaries: BTreeMap<SwnVersion, ParseSummary>,
    pub datasets: Vec<Dataset>,
}

impl Ingested {
    pub fn lexicon(&self, version: SwnVersion) -> &Lexicon {
        &self.lexica[&version]
    }
}

fn open(path: &Path) -> Result<BufReader<fs::File>, PipelineError> {
    fs::File::open(path).map(BufReader::new).map_err(|e| PipelineError::input(path, e))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<fs::File>, PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| PipelineError::input(dir, e))?;
    }
    fs::File::create(path).map(BufWriter::new).map_err(|e| PipelineError::input(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| PipelineError::input(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| PipelineError::input(dir, e))?;
    }
    fs::write(path, text).map_err(|e| PipelineError::input(path, e))
}

/// Loads and aligns every input without writing anything.
pub fn load(config: &RunConfig) -> Result<Ingested, PipelineError> {
    config.validate()?;
    let mut lexica = BTreeMap::new();
    let mut lexicon_summaries = BTreeMap::new();
    for input in &config.lexicon {
        let (lex, summary) = Lexicon::from_path(&input.path, input.version)
            .map_err(|e| PipelineError::input(&input.path, e))?;
        log::info!(
            "{}: {} accepted, {} skipped, {} conflicts",
            input.path.display(),
            summary.accepted,
            summary.skipped,
            summary.conflicts
        );
        lexica.insert(input.version, lex);
        lexicon_summaries.insert(input.version, summary);
    }
    let lemma_map = match &config.lemma_map {
        Some(p) => LemmaMap::parse(open(p)?).map_err(|e| PipelineError::input(p, e))?,
        None => LemmaMap::new(),
    };
    let mut datasets = Vec::new();
    for g in &config.gold {
        let reader = open(&g.path)?;
        let (records, parse) = match g.kind {
            GoldKind::Anew => parse_anew(reader).map(|(r, s)| (GoldRecords::Anew(r), s)),
            GoldKind::Gi => parse_gi(reader).map(|(r, s)| (GoldRecords::Gi(r), s)),
        }
        .map_err(|e| PipelineError::input(&g.path, e))?;
        let (instances, alignment) = align(
            &records,
            &lexica[&SwnVersion::Swn1],
            &lexica[&SwnVersion::Swn3],
            &lemma_map,
        )
        .map_err(|e| PipelineError::input(&g.path, e))?;
        log::info!("{}: {} instances after alignment", g.kind, instances.len());
        datasets.push(Dataset {
            kind: g.kind,
            instances,
            parse,
            alignment,
        });
    }
    Ok(Ingested {
        lexica,
        lexicon_summaries,
        datasets,
    })
}

#[derive(Serialize)]
struct AlignmentFile<'a> {
    parse: &'a GoldParseSummary,
    alignment: &'a AlignmentReport,
}

/// Loads, aligns and writes `aligned/<kind>.tsv`, `alignment/<kind>.json`
/// and `lexicon/<version>.json` under the output directory.
pub fn cmd_ingest(config: &RunConfig) -> Result<Ingested, PipelineError> {
    let ingested = load(config)?;
    let out = &config.out;
    for (version, summary) in &ingested.lexicon_summaries {
        write_json(&out.join("lexicon").join(format!("{version}.json")), summary)?;
    }
    for d in &ingested.datasets {
        let path = out.join("aligned").join(format!("{}.tsv", d.kind));
        let mut w = create(&path)?;
        write_instances(&mut w, &d.instances).map_err(|e| PipelineError::input(&path, e))?;
        drop(w);
        write_json(
            &out.join("alignment").join(format!("{}.json", d.kind)),
            &AlignmentFile {
                parse: &d.parse,
                alignment: &d.alignment,
            },
        )?;
    }
    output::write_manifest(config, &["ingest"])?;
    Ok(ingested)
}

/// Score lists of an instance in one lexicon; entries missing from the
/// lexicon read as a single all-zero sense.
pub fn instance_scores(lexicon: &Lexicon, instance: &GoldInstance) -> (Vec<f64>, Vec<f64>) {
    match lexicon.lookup(&instance.lemma, instance.pos) {
        Some(entry) => entry.sense_vectors(),
        None => (vec![0.0], vec![0.0]),
    }
}

pub fn instance_features(lexicon: &Lexicon, instance: &GoldInstance, schema: &FeatureSchema) -> FeatureVector {
    let (pos, neg) = instance_scores(lexicon, instance);
    feature_vector_from_scores(&pos, &neg, schema, &instance.key())
        .expect("lexicon entries hold valid score lists")
}

/// Writes `features/<kind>_<version>.tsv` for every dataset and lexicon.
pub fn cmd_features(config: &RunConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let ingested = cmd_ingest(config)?;
    let schema = FeatureSchema::standard();
    let mut written = Vec::new();
    for d in &ingested.datasets {
        for (version, lexicon) in &ingested.lexica {
            let rows: Vec<(String, FeatureVector)> = d
                .instances
                .iter()
                .map(|i| (i.key(), instance_features(lexicon, i, &schema)))
                .collect();
            let path = config.out.join("features").join(format!("{}_{version}.tsv", d.kind));
            let mut w = create(&path)?;
            write_feature_matrix(&mut w, &schema, &rows).map_err(|e| PipelineError::input(&path, e))?;
            written.push(path);
        }
    }
    output::write_manifest(config, &["ingest", "features"])?;
    Ok(written)
}
