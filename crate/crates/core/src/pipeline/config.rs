use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::eval::{SplitPlan, SubgroupKey, DEFAULT_MIN_SUBGROUP};
use crate::formulae::FormulaVariant;
use crate::gold::GoldKind;
use crate::learners::MaxMarginGrid;
use crate::lexicon::SwnVersion;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconInput {
    pub path: PathBuf,
    pub version: SwnVersion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldInput {
    pub path: PathBuf,
    pub kind: GoldKind,
}

fn split_spec(s: &str) -> Option<(&str, &str)> {
    s.rsplit_once(':').filter(|(p, t)| !p.is_empty() && !t.is_empty())
}

impl std::str::FromStr for LexiconInput {
    type Err = PipelineError;

    /// `path:version`, e.g. `data/swn3.txt:swn3`.
    fn from_str(s: &str) -> Result<Self, PipelineError> {
        let (path, version) =
            split_spec(s).ok_or_else(|| PipelineError::Config(format!("expected path:version, got {s:?}")))?;
        Ok(LexiconInput {
            path: path.into(),
            version: version.parse().map_err(|e| PipelineError::Config(format!("{e}")))?,
        })
    }
}

impl std::str::FromStr for GoldInput {
    type Err = PipelineError;

    /// `path:kind`, e.g. `data/anew.csv:anew`.
    fn from_str(s: &str) -> Result<Self, PipelineError> {
        let (path, kind) =
            split_spec(s).ok_or_else(|| PipelineError::Config(format!("expected path:kind, got {s:?}")))?;
        Ok(GoldInput {
            path: path.into(),
            kind: kind.parse().map_err(|e| PipelineError::Config(format!("{e}")))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSettings {
    pub train_fraction: f64,
    pub repeats: usize,
}

impl Default for SplitSettings {
    fn default() -> Self {
        SplitSettings {
            train_fraction: 0.7,
            repeats: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridSize {
    /// The full published-style grid.
    Default,
    /// A reduced grid for quick runs.
    Small,
}

impl GridSize {
    pub fn grid(self) -> MaxMarginGrid {
        match self {
            GridSize::Default => MaxMarginGrid::default(),
            GridSize::Small => MaxMarginGrid {
                c: vec![0.1, 1.0, 10.0],
                gamma: vec![0.01, 0.1, 1.0],
                epsilon: vec![0.1],
                linear: true,
                rbf: true,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerSettings {
    pub folds: usize,
    pub grid: GridSize,
    pub resamples: usize,
    pub sample_fraction: f64,
    pub selection_threshold: f64,
    pub ar_iterations: usize,
    pub min_subgroup: usize,
}

impl Default for LearnerSettings {
    fn default() -> Self {
        LearnerSettings {
            folds: 10,
            grid: GridSize::Default,
            resamples: 1000,
            sample_fraction: 0.75,
            selection_threshold: 0.25,
            ar_iterations: 10_000,
            min_subgroup: DEFAULT_MIN_SUBGROUP,
        }
    }
}

/// Everything a run needs. Paths in a configuration file are relative to
/// that file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub lexicon: Vec<LexiconInput>,
    #[serde(default)]
    pub gold: Vec<GoldInput>,
    #[serde(default)]
    pub lemma_map: Option<PathBuf>,
    #[serde(default)]
    pub split: SplitSettings,
    /// System names or the groups `all`, `formulae`, `learners`.
    #[serde(default = "default_systems")]
    pub systems: Vec<String>,
    /// `a:b` pairs; `*:b` compares every other system with `b`.
    #[serde(default)]
    pub pairs: Vec<String>,
    #[serde(default)]
    pub subgroups: Vec<SubgroupKey>,
    #[serde(default)]
    pub learner: LearnerSettings,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_systems() -> Vec<String> {
    vec!["all".into()]
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            out: default_out(),
            lexicon: Vec::new(),
            gold: Vec::new(),
            lemma_map: None,
            split: SplitSettings::default(),
            systems: default_systems(),
            pairs: Vec::new(),
            subgroups: Vec::new(),
            learner: LearnerSettings::default(),
        }
    }
}

/// Learned systems; `fs` variants run stability selection first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnerKind {
    Svm,
    SvmFs,
    Gp,
    GpFs,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 4] = [LearnerKind::Svm, LearnerKind::SvmFs, LearnerKind::Gp, LearnerKind::GpFs];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Svm => "svm",
            LearnerKind::SvmFs => "svmfs",
            LearnerKind::Gp => "gp",
            LearnerKind::GpFs => "gpfs",
        }
    }

    pub fn selects_features(self) -> bool {
        matches!(self, LearnerKind::SvmFs | LearnerKind::GpFs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemSpec {
    Formula(FormulaVariant),
    Learner(LearnerKind),
}

impl SystemSpec {
    pub fn name(&self) -> String {
        match self {
            SystemSpec::Formula(fv) => fv.to_string(),
            SystemSpec::Learner(l) => l.name().to_string(),
        }
    }
}

/// Expands system names in order; repeated names are kept.
pub fn expand_systems(names: &[String]) -> Result<Vec<SystemSpec>, PipelineError> {
    let formulae = || FormulaVariant::all().into_iter().map(SystemSpec::Formula);
    let learners = || LearnerKind::ALL.into_iter().map(SystemSpec::Learner);
    let mut out = Vec::new();
    for name in names {
        let name = name.trim().to_ascii_lowercase();
        match name.as_str() {
            "all" => out.extend(formulae().chain(learners())),
            "formulae" => out.extend(formulae()),
            "learners" => out.extend(learners()),
            other => {
                if let Some(l) = LearnerKind::ALL.into_iter().find(|l| l.name() == other) {
                    out.push(SystemSpec::Learner(l));
                } else {
                    let fv: FormulaVariant = other
                        .parse()
                        .map_err(|_| PipelineError::Config(format!("unknown system {other:?}")))?;
                    out.push(SystemSpec::Formula(fv));
                }
            }
        }
    }
    if out.is_empty() {
        return Err(PipelineError::Config("no systems requested".into()));
    }
    Ok(out)
}

impl RunConfig {
    /// Reads a TOML configuration, resolving relative paths against the
    /// file's directory.
    pub fn from_path(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::input(path, e))?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        config.lexicon.iter_mut().for_each(|l| resolve(&mut l.path));
        config.gold.iter_mut().for_each(|g| resolve(&mut g.path));
        if let Some(p) = config.lemma_map.as_mut() {
            resolve(p);
        }
        resolve(&mut config.out);
        Ok(config)
    }

    pub fn seed(&self) -> Result<u64, PipelineError> {
        self.seed
            .ok_or_else(|| PipelineError::Config("a master seed is required (--seed or `seed =`)".into()))
    }

    pub fn split_plan(&self) -> Result<SplitPlan, PipelineError> {
        Ok(SplitPlan {
            train_fraction: self.split.train_fraction,
            repeats: self.split.repeats,
            master_seed: self.seed()?,
        })
    }

    pub fn systems(&self) -> Result<Vec<SystemSpec>, PipelineError> {
        expand_systems(&self.systems)
    }

    /// Checks the seed, the lexicon versions and that every input exists.
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.seed()?;
        for v in [SwnVersion::Swn1, SwnVersion::Swn3] {
            let n = self.lexicon.iter().filter(|l| l.version == v).count();
            if n != 1 {
                return Err(PipelineError::Config(format!(
                    "exactly one {v} lexicon is required, got {n}"
                )));
            }
        }
        if self.gold.is_empty() {
            return Err(PipelineError::Config("no gold corpus given".into()));
        }
        let mut kinds: Vec<GoldKind> = self.gold.iter().map(|g| g.kind).collect();
        kinds.sort();
        kinds.dedup();
        if kinds.len() != self.gold.len() {
            return Err(PipelineError::Config("each gold kind may be given once".into()));
        }
        let paths = self
            .lexicon
            .iter()
            .map(|l| &l.path)
            .chain(self.gold.iter().map(|g| &g.path))
            .chain(self.lemma_map.iter());
        for p in paths {
            if !p.is_file() {
                return Err(PipelineError::input(p, std::io::Error::from(std::io::ErrorKind::NotFound)));
            }
        }
        if self.learner.folds < 2 {
            return Err(PipelineError::Config("at least 2 cross-validation folds are required".into()));
        }
        self.systems()?;
        Ok(())
    }
}
