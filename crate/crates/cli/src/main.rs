use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use priorpol::eval::SubgroupKey;
use priorpol::pipeline::{
    cmd_evaluate, cmd_features, cmd_ingest, cmd_report, cmd_significance, GoldInput, LexiconInput, PipelineError,
    RunConfig,
};

/// Prior-polarity scoring, learning and evaluation over sentiment lexica.
#[derive(Debug, Parser)]
#[command(name = "priorpol", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, env = "PRIORPOL_CONFIG")]
    config: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Lexicon as path:version (swn1 or swn3); replaces the configured list.
    #[arg(long, global = true, value_name = "PATH:VERSION")]
    lexicon: Vec<LexiconInput>,
    /// Gold corpus as path:kind (anew or gi); replaces the configured list.
    #[arg(long, global = true, value_name = "PATH:KIND")]
    gold: Vec<GoldInput>,
    /// Word-to-lemma table.
    #[arg(long, global = true)]
    lemma_map: Option<PathBuf>,
    /// Comma-separated systems, e.g. fs_m,uni,svmfs or all, formulae, learners.
    #[arg(long, global = true, value_delimiter = ',')]
    systems: Vec<String>,
    /// Comma-separated a:b significance pairs; `*:b` compares all with b.
    #[arg(long, global = true, value_delimiter = ',')]
    pairs: Vec<String>,
    /// Comma-separated subgroup keys: pos_class, gender, polarity_sign.
    #[arg(long, global = true, value_delimiter = ',')]
    subgroups: Vec<SubgroupKey>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// More logging (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse lexica and gold corpora and write the aligned instances.
    Ingest,
    /// Write the feature matrix of every dataset and lexicon.
    Features,
    /// Evaluate every requested system and write report tables.
    Evaluate,
    /// Run the requested pairwise tests over stored reports.
    Significance,
    /// Re-render stored reports.
    Report,
}

impl Cli {
    fn config(&self) -> Result<RunConfig, PipelineError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::from_path(path)?,
            None => RunConfig::default(),
        };
        if self.seed.is_some() {
            config.seed = self.seed;
        }
        if !self.lexicon.is_empty() {
            config.lexicon = self.lexicon.clone();
        }
        if !self.gold.is_empty() {
            config.gold = self.gold.clone();
        }
        if self.lemma_map.is_some() {
            config.lemma_map = self.lemma_map.clone();
        }
        if !self.systems.is_empty() {
            config.systems = self.systems.clone();
        }
        if !self.pairs.is_empty() {
            config.pairs = self.pairs.clone();
        }
        if !self.subgroups.is_empty() {
            config.subgroups = self.subgroups.clone();
        }
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        Ok(config)
    }
}

fn run(cli: &Cli) -> Result<(), PipelineError> {
    let config = cli.config()?;
    match cli.command {
        Command::Ingest => {
            let ingested = cmd_ingest(&config)?;
            for d in &ingested.datasets {
                let a = &d.alignment;
                println!(
                    "{}: {} words, {} unaligned, {} all-zero filtered, {} instances",
                    d.kind, a.input_words, a.unaligned_words, a.all_zero_filtered, a.kept
                );
            }
        }
        Command::Features => {
            for path in cmd_features(&config)? {
                println!("{}", path.display());
            }
        }
        Command::Evaluate => print!("{}", cmd_evaluate(&config)?.text),
        Command::Significance => print!("{}", cmd_significance(&config)?),
        Command::Report => print!("{}", cmd_report(&config.out)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
