use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{write_json, write_text, PipelineError, RunConfig};
use crate::eval::{mean_std, render_table_text, render_table_tsv, ReportSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Provenance of a run. Contains no timestamps, so identical runs write
/// identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub toolkit_version: String,
    pub seed: u64,
    pub commands: Vec<String>,
    pub config_sha256: String,
    pub config: RunConfig,
    pub inputs: Vec<InputDigest>,
}

fn file_digest(path: &Path) -> Result<String, PipelineError> {
    let mut file = fs::File::open(path).map_err(|e| PipelineError::input(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| PipelineError::input(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

impl Manifest {
    pub fn build(config: &RunConfig, commands: &[&str]) -> Result<Self, PipelineError> {
        let canonical = serde_json::to_string(config).map_err(|e| PipelineError::Config(e.to_string()))?;
        let paths = config
            .lexicon
            .iter()
            .map(|l| &l.path)
            .chain(config.gold.iter().map(|g| &g.path))
            .chain(config.lemma_map.iter());
        let inputs = paths
            .map(|p| {
                Ok(InputDigest {
                    path: p.clone(),
                    sha256: file_digest(p)?,
                })
            })
            .collect::<Result<_, PipelineError>>()?;
        Ok(Manifest {
            toolkit_version: crate::VERSION.to_string(),
            seed: config.seed()?,
            commands: commands.iter().map(|c| c.to_string()).collect(),
            config_sha256: hex::encode(Sha256::digest(canonical.as_bytes())),
            config: config.clone(),
            inputs,
        })
    }
}

pub(crate) fn write_manifest(config: &RunConfig, commands: &[&str]) -> Result<(), PipelineError> {
    write_json(&config.out.join("manifest.json"), &Manifest::build(config, commands)?)
}

pub(crate) fn write_tables(out: &Path, stem: &str, set: &ReportSet) -> Result<(), PipelineError> {
    let dir = out.join("tables");
    write_text(&dir.join(format!("{stem}.tsv")), &render_table_tsv(set))?;
    write_text(&dir.join(format!("{stem}.txt")), &render_table_text(set))
}

fn check_set(set: &ReportSet) -> Result<(), String> {
    for r in &set.reports {
        if r.metric != set.metric {
            return Err(format!("{} uses a different metric than its table", r.system));
        }
        let (mean, std) = mean_std(&r.per_split);
        if (mean - r.mean).abs() > 1e-12 || (std - r.std).abs() > 1e-12 {
            return Err(format!("{}: mean/std disagree with per-split values", r.system));
        }
    }
    Ok(())
}

/// Reads every `reports/*.json` under `out`, ordered by file name. A missing
/// directory is an empty set.
pub fn read_report_sets(out: &Path) -> Result<Vec<(String, ReportSet)>, PipelineError> {
    let dir = out.join("reports");
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| PipelineError::input(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = fs::read_to_string(&path).map_err(|e| PipelineError::Corrupt {
                path: path.clone(),
                message: e.to_string(),
            })?;
            let set: ReportSet = serde_json::from_str(&text)
                .map_err(|e| e.to_string())
                .and_then(|s| check_set(&s).map(|_| s))
                .map_err(|message| PipelineError::Corrupt {
                    path: path.clone(),
                    message,
                })?;
            let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            Ok((stem, set))
        })
        .collect()
}

/// Header line printed when there are no reports.
pub const EMPTY_TABLE: &str = "system\tmean\tstd\tsplits\tties\n";

/// Re-renders stored reports into `tables/` and returns the text tables.
pub fn cmd_report(out: &Path) -> Result<String, PipelineError> {
    let sets = read_report_sets(out)?;
    if sets.is_empty() {
        return Ok(EMPTY_TABLE.to_string());
    }
    let mut text = String::new();
    for (stem, set) in &sets {
        write_tables(out, stem, set)?;
        text.push_str(&render_table_text(set));
        text.push('\n');
    }
    Ok(text)
}
