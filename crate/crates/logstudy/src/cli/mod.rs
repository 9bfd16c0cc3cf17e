//! Pipeline orchestration: one subcommand per stage plus `run-all`.
//!
//! Stages communicate only through files under `<out>/<stage>/`, each with
//! a `summary.json` recording digests of its inputs and outputs. A stage
//! whose recorded input digests match the current inputs and whose outputs
//! are intact is skipped, so reruns are no-ops and interrupted runs resume
//! where they stopped.
//!
//! Paths inside a config file resolve relative to the config file's
//! directory; paths given on the command line resolve relative to the
//! working directory. Exit code 0 means success, 1 means the run finished
//! with per-file failures recorded in stage summaries, 2 means the
//! configuration was unusable.

mod report;
mod stages;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub use report::render_report;
pub use stages::{StageSummary, STAGES};

use crate::corpus::SelectionCriteria;
use crate::generation::GenerationConfig;
use crate::source::{ExtractionConfig, SourceError};

#[derive(Debug, Parser)]
#[command(name = "logstudy", version, about = "Evaluate file-level log generation on Python corpora")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Provider: mock, replay, or http.
    #[arg(long, global = true)]
    pub provider: Option<String>,
    /// Model identifier sent to the provider.
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Seed for sampling; recorded in every output header.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Forbid network use; requires fixture metadata and a local provider.
    #[arg(long, global = true)]
    pub offline: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Select repositories and list qualifying files into manifest.json.
    Mine,
    /// Extract ground-truth logs and write stripped sources.
    Prepare,
    /// Ask the provider to re-log every stripped file.
    Generate,
    /// Extract logs from generated sources into logs.jsonl.
    Extract,
    /// Match ground-truth logs with generated logs per code path.
    Pair,
    /// Compute placement and ingredient metrics into metrics.json.
    Evaluate,
    /// Bin disagreeing pairs into review categories.
    Categorize,
    /// Draw the stratified review sample and emit review_sheet.csv.
    Sample,
    /// Render report.md from metrics and categories.
    Report,
    /// Run every stage in order.
    RunAll,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unusable configuration or missing prerequisites; exit 2.
    #[error("{0}")]
    Config(String),
    /// Runtime failure after a valid configuration; exit 1.
    #[error("{0}")]
    Stage(String),
}

impl From<SourceError> for CliError {
    fn from(e: SourceError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// `[corpus]`: where the subject projects come from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub repo_list: PathBuf,
    /// Offline metadata records; unset means the live platform API.
    pub metadata_dir: Option<PathBuf>,
    pub checkouts_dir: PathBuf,
    /// Date the metadata snapshot was taken, "YYYY-MM-DD".
    pub snapshot_date: NaiveDate,
    pub api_endpoint: String,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection {
            repo_list: "repos.txt".into(),
            metadata_dir: None,
            checkouts_dir: "checkouts".into(),
            snapshot_date: chrono::Utc::now().date_naive(),
            api_endpoint: "https://api.github.com".into(),
        }
    }
}

/// `[extraction]`: log-call recognition knobs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionSection {
    /// Regex for logger receiver names; unset uses the built-in default.
    pub logger_pattern: Option<String>,
}

impl ExtractionSection {
    pub fn to_config(&self) -> Result<ExtractionConfig, SourceError> {
        match &self.logger_pattern {
            Some(pattern) => ExtractionConfig::with_pattern(pattern),
            None => Ok(ExtractionConfig::default()),
        }
    }
}

/// `[generation]`: provider selection and decoding settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationSection {
    pub provider: String,
    pub model_id: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub context_window_tokens: u32,
    pub chars_per_token: f64,
    pub request_timeout_secs: u64,
    pub max_retries: u32,
    pub retry_base_ms: u64,
    /// Chat endpoint for the http provider; `LOGSTUDY_API_BASE` overrides.
    pub endpoint: Option<String>,
    /// Response directory for the replay provider; defaults to the run cache.
    pub replay_dir: Option<PathBuf>,
}

impl Default for GenerationSection {
    fn default() -> Self {
        let base = GenerationConfig::default();
        GenerationSection {
            provider: base.provider_name,
            model_id: base.model_id,
            temperature: base.temperature,
            max_output_tokens: base.max_output_tokens,
            context_window_tokens: base.context_window_tokens,
            chars_per_token: base.chars_per_token,
            request_timeout_secs: base.request_timeout.as_secs(),
            max_retries: base.max_retries,
            retry_base_ms: base.retry_base_ms,
            endpoint: None,
            replay_dir: None,
        }
    }
}

impl GenerationSection {
    pub fn to_config(&self) -> GenerationConfig {
        GenerationConfig {
            provider_name: self.provider.clone(),
            model_id: self.model_id.clone(),
            temperature: self.temperature,
            max_output_tokens: self.max_output_tokens,
            context_window_tokens: self.context_window_tokens,
            chars_per_token: self.chars_per_token,
            request_timeout: std::time::Duration::from_secs(self.request_timeout_secs),
            max_retries: self.max_retries,
            retry_base_ms: self.retry_base_ms,
        }
    }
}

/// `[sampling]`: review-sample precision targets.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    pub confidence: f64,
    pub margin: f64,
}

impl Default for SamplingSection {
    fn default() -> Self {
        SamplingSection { confidence: 0.95, margin: 0.05 }
    }
}

/// `[run]`: output location, seed, and parallelism.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub out_dir: PathBuf,
    pub seed: u64,
    /// 0 lets the worker pool size itself.
    pub jobs: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { out_dir: "out".into(), seed: 17, jobs: 0 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: CorpusSection,
    pub selection: SelectionCriteria,
    pub extraction: ExtractionSection,
    pub generation: GenerationSection,
    pub sampling: SamplingSection,
    pub run: RunSection,
}

impl RunConfig {
    /// Parse a TOML config and resolve its relative paths against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {path:?}: {e}")))?;
        let mut config: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {path:?}: {e}")))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.rebase(base);
        Ok(config)
    }

    fn rebase(&mut self, base: &Path) {
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        rebase(&mut self.corpus.repo_list);
        rebase(&mut self.corpus.checkouts_dir);
        if let Some(dir) = &mut self.corpus.metadata_dir {
            rebase(dir);
        }
        if let Some(dir) = &mut self.generation.replay_dir {
            rebase(dir);
        }
        rebase(&mut self.run.out_dir);
    }

    /// Referenced input paths must exist before any stage runs.
    pub fn validate(&self, offline: bool) -> Result<(), CliError> {
        if !self.corpus.repo_list.is_file() {
            return Err(CliError::Config(format!(
                "repo list {:?} does not exist",
                self.corpus.repo_list
            )));
        }
        if !self.corpus.checkouts_dir.is_dir() {
            return Err(CliError::Config(format!(
                "checkouts directory {:?} does not exist",
                self.corpus.checkouts_dir
            )));
        }
        if let Some(dir) = &self.corpus.metadata_dir {
            if !dir.is_dir() {
                return Err(CliError::Config(format!("metadata directory {dir:?} does not exist")));
            }
        } else if offline {
            return Err(CliError::Config(
                "offline runs need [corpus].metadata_dir; live metadata requires the network".into(),
            ));
        }
        if offline && self.generation.provider == "http" {
            return Err(CliError::Config("the http provider cannot run offline".into()));
        }
        match self.generation.provider.as_str() {
            "mock" | "replay" | "http" => {}
            other => {
                return Err(CliError::Config(format!(
                    "unknown provider {other:?}; expected mock, replay, or http"
                )))
            }
        }
        if !(0.0..1.0).contains(&self.sampling.margin) || self.sampling.margin <= 0.0 {
            return Err(CliError::Config("sampling margin must be in (0, 1)".into()));
        }
        if !(0.0..1.0).contains(&self.sampling.confidence) || self.sampling.confidence <= 0.0 {
            return Err(CliError::Config("sampling confidence must be in (0, 1)".into()));
        }
        self.extraction.to_config()?;
        Ok(())
    }
}

/// Apply command-line overrides and validate.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.run.out_dir = out.clone();
    }
    if let Some(provider) = &cli.provider {
        config.generation.provider = provider.clone();
    }
    if let Some(model) = &cli.model {
        config.generation.model_id = model.clone();
    }
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        config.run.jobs = jobs;
    }
    config.validate(cli.offline)?;
    Ok(config)
}

/// Run the requested command. `Ok(true)` means per-file failures were
/// recorded somewhere along the way.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    let config = resolve_config(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.run.jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?;
    let ctx = stages::StageContext { config: &config, offline: cli.offline };
    pool.install(|| match cli.command {
        Command::Mine => stages::mine(&ctx),
        Command::Prepare => stages::prepare(&ctx),
        Command::Generate => stages::generate(&ctx),
        Command::Extract => stages::extract(&ctx),
        Command::Pair => stages::pair(&ctx),
        Command::Evaluate => stages::evaluate(&ctx),
        Command::Categorize => stages::categorize(&ctx),
        Command::Sample => stages::sample(&ctx),
        Command::Report => stages::report(&ctx),
        Command::RunAll => {
            let mut partial = false;
            partial |= stages::mine(&ctx)?;
            partial |= stages::prepare(&ctx)?;
            partial |= stages::generate(&ctx)?;
            partial |= stages::extract(&ctx)?;
            partial |= stages::pair(&ctx)?;
            partial |= stages::evaluate(&ctx)?;
            partial |= stages::categorize(&ctx)?;
            partial |= stages::sample(&ctx)?;
            partial |= stages::report(&ctx)?;
            Ok(partial)
        }
    })
}

/// Entry point for the thin binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(false) => ExitCode::from(0),
        Ok(true) => {
            eprintln!("completed with recorded per-file failures; see stage summaries");
            ExitCode::from(1)
        }
        Err(CliError::Stage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Config(message)) => {
            eprintln!("configuration error: {message}");
            ExitCode::from(2)
        }
    }
}
