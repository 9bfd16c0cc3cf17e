//! Stage implementations and the content-addressed stage runner.
//!
//! Every stage computes a digest map of its inputs before doing any work.
//! If the previous run's summary recorded the same input digests and its
//! outputs still hash to the recorded values, the stage is skipped. Output
//! digests therefore double as corruption detection.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CliError, RunConfig};
use crate::corpus::{
    self, corpus_stats, fetch_metadata, filter_logged_files, ingest_repo, read_repo_list,
    repo_file_stem, CorpusError, CorpusManifest, MetadataSource,
};
use crate::generation::{
    self, GenerationConfig, GenerationError, GenerationRecord, HttpChatProvider,
    MockLoggerProvider, PromptCache, Provider, ReplayProvider,
};
use crate::metrics::{ingredient_report, pair_metrics, placement_metrics, IngredientReport, PlacementReport};
use crate::pairing::{index_by_path, pair_logs, pair_records, PairingOutcome};
use crate::source::{extract_logs, strip_file, LogStatement, Origin, SourceFile, StrippedFile};
use crate::study::{categorize as categorize_pairs, emit_review_sheet, plan_sample, stratified_sample, CategorizedRecord};
use crate::util::{read_jsonl, sha256_parts, write_atomic, write_jsonl};

/// Pipeline order; each stage requires its predecessor's artifacts.
pub const STAGES: [&str; 9] =
    ["mine", "prepare", "generate", "extract", "pair", "evaluate", "categorize", "sample", "report"];

pub struct StageContext<'a> {
    pub config: &'a RunConfig,
    pub offline: bool,
}

impl StageContext<'_> {
    fn stage_dir(&self, name: &str) -> PathBuf {
        self.config.run.out_dir.join(name)
    }

    fn cache_dir(&self) -> PathBuf {
        self.config.run.out_dir.join("cache")
    }

    /// A predecessor artifact that must already exist.
    fn require(&self, stage: &str, rel: &str) -> Result<PathBuf, CliError> {
        let path = self.stage_dir(stage).join(rel);
        if path.exists() {
            Ok(path)
        } else {
            Err(CliError::Config(format!(
                "missing {path:?}; run the `{stage}` stage first"
            )))
        }
    }
}

/// What a completed stage wrote and observed, persisted as summary.json.
#[derive(Debug, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: String,
    pub seed: u64,
    /// Digest per named input; a stage reruns when any differs.
    pub inputs: BTreeMap<String, String>,
    /// Digest per output path relative to the stage directory.
    pub outputs: BTreeMap<String, String>,
    pub counts: BTreeMap<String, u64>,
    /// Per-file failures; non-empty turns the run's exit code to 1.
    pub failures: Vec<String>,
}

struct StageWork {
    counts: BTreeMap<String, u64>,
    failures: Vec<String>,
    outputs: Vec<&'static str>,
}

fn stage_io(what: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Stage(format!("{what}: {e}"))
}

fn digest_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| stage_io(&format!("digest {path:?}"), e))?;
    Ok(sha256_parts(&[&bytes]))
}

fn digest_dir(dir: &Path) -> Result<String, CliError> {
    let mut parts: Vec<String> = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| stage_io(&format!("digest {dir:?}"), e))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(dir)
            .expect("entry under walk root")
            .to_string_lossy()
            .replace('\\', "/");
        parts.push(rel);
        parts.push(digest_file(entry.path())?);
    }
    let refs: Vec<&[u8]> = parts.iter().map(|p| p.as_bytes()).collect();
    Ok(sha256_parts(&refs))
}

fn digest_path(path: &Path) -> Result<String, CliError> {
    if path.is_dir() {
        digest_dir(path)
    } else {
        digest_file(path)
    }
}

fn digest_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    sha256_parts(&[&bytes])
}

fn load_summary(dir: &Path) -> Option<StageSummary> {
    let text = std::fs::read_to_string(dir.join("summary.json")).ok()?;
    serde_json::from_str(&text).ok()
}

fn outputs_intact(dir: &Path, outputs: &BTreeMap<String, String>) -> bool {
    outputs.iter().all(|(rel, digest)| {
        let path = dir.join(rel);
        path.exists() && digest_path(&path).map(|d| d == *digest).unwrap_or(false)
    })
}

fn run_stage(
    ctx: &StageContext,
    name: &str,
    inputs: BTreeMap<String, String>,
    body: impl FnOnce(&Path) -> Result<StageWork, CliError>,
) -> Result<bool, CliError> {
    let dir = ctx.stage_dir(name);
    if let Some(previous) = load_summary(&dir) {
        if previous.inputs == inputs && outputs_intact(&dir, &previous.outputs) {
            println!("{name}: up to date");
            return Ok(!previous.failures.is_empty());
        }
    }
    std::fs::create_dir_all(&dir).map_err(|e| stage_io(&format!("create {dir:?}"), e))?;
    let work = body(&dir)?;
    let mut outputs = BTreeMap::new();
    for rel in &work.outputs {
        outputs.insert(rel.to_string(), digest_path(&dir.join(rel))?);
    }
    let summary = StageSummary {
        stage: name.to_string(),
        seed: ctx.config.run.seed,
        inputs,
        outputs,
        counts: work.counts,
        failures: work.failures,
    };
    let mut body_json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    body_json.push('\n');
    write_atomic(&dir.join("summary.json"), body_json.as_bytes())
        .map_err(|e| stage_io("write summary.json", e))?;

    let mut line = format!("{name}: ok");
    for (key, value) in &summary.counts {
        let _ = write!(line, " {key}={value}");
    }
    if !summary.failures.is_empty() {
        let _ = write!(line, " failures={}", summary.failures.len());
    }
    println!("{line}");
    Ok(!summary.failures.is_empty())
}

fn tool_input() -> (String, String) {
    ("tool".into(), env!("CARGO_PKG_VERSION").into())
}

fn write_pretty_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("document serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes()).map_err(|e| stage_io(&format!("write {path:?}"), e))
}

fn read_text_lossy(path: &Path) -> io::Result<String> {
    Ok(String::from_utf8_lossy(&std::fs::read(path)?).into_owned())
}

fn reset_dir(dir: &Path) -> Result<(), CliError> {
    if dir.exists() {
        std::fs::remove_dir_all(dir).map_err(|e| stage_io(&format!("clear {dir:?}"), e))?;
    }
    std::fs::create_dir_all(dir).map_err(|e| stage_io(&format!("create {dir:?}"), e))
}

fn write_tree_file(root: &Path, rel: &str, content: &str) -> Result<(), CliError> {
    let path = root.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| stage_io(&format!("create {parent:?}"), e))?;
    }
    write_atomic(&path, content.as_bytes()).map_err(|e| stage_io(&format!("write {path:?}"), e))
}

fn read_manifest(ctx: &StageContext) -> Result<CorpusManifest, CliError> {
    let path = ctx.require("mine", "manifest.json")?;
    let text = std::fs::read_to_string(&path).map_err(|e| stage_io("read manifest.json", e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Stage(format!("manifest.json: {e}")))
}

// ---------------------------------------------------------------------
// mine

pub fn mine(ctx: &StageContext) -> Result<bool, CliError> {
    let cfg = ctx.config;
    let metadata_input = match &cfg.corpus.metadata_dir {
        Some(dir) => digest_dir(dir)?,
        None => format!("live:{}", cfg.corpus.api_endpoint),
    };
    let inputs = BTreeMap::from([
        tool_input(),
        ("repo_list".into(), digest_file(&cfg.corpus.repo_list)?),
        ("metadata".into(), metadata_input),
        ("checkouts".into(), digest_dir(&cfg.corpus.checkouts_dir)?),
        (
            "criteria".into(),
            digest_json(&(&cfg.selection, cfg.corpus.snapshot_date, &cfg.extraction)),
        ),
    ]);
    run_stage(ctx, "mine", inputs, |dir| {
        let repo_ids = read_repo_list(
            &std::fs::read_to_string(&cfg.corpus.repo_list)
                .map_err(|e| stage_io("read repo list", e))?,
        );
        let source = match &cfg.corpus.metadata_dir {
            Some(dir) => MetadataSource::FixtureDir(dir.clone()),
            None => MetadataSource::GitHubApi { endpoint: cfg.corpus.api_endpoint.clone() },
        };
        let fetched = fetch_metadata(&repo_ids, &source).map_err(|e| match e {
            CorpusError::Auth(message) => CliError::Config(message),
            other => CliError::Stage(other.to_string()),
        })?;
        let mut selected =
            corpus::select_repos(&fetched.records, &cfg.selection, cfg.corpus.snapshot_date);
        selected.sort_by(|a, b| a.repo_id.cmp(&b.repo_id));

        let mut failures = Vec::new();
        let mut all_files: Vec<SourceFile> = Vec::new();
        for repo in &selected {
            let checkout = cfg.corpus.checkouts_dir.join(repo_file_stem(&repo.repo_id));
            if !checkout.is_dir() {
                failures.push(format!("{}: no checkout at {checkout:?}", repo.repo_id));
                continue;
            }
            let (files, skipped) =
                ingest_repo(&repo.repo_id, &checkout).map_err(|e| stage_io("ingest", e))?;
            for (rel, reason) in skipped {
                failures.push(format!("{}/{rel}: {reason}", repo.repo_id));
            }
            all_files.extend(files);
        }

        let extraction = cfg.extraction.to_config()?;
        let filtered = filter_logged_files(&all_files, &extraction);
        let mut qualifying: Vec<String> =
            filtered.kept.iter().map(|f| f.file_id.clone()).collect();
        qualifying.sort();

        let manifest = CorpusManifest {
            snapshot_date: cfg.corpus.snapshot_date,
            stats: corpus_stats(&selected, cfg.corpus.snapshot_date),
            selected_repos: selected,
            unresolved_repos: fetched.unresolved,
            qualifying_files: qualifying,
            total_python_files: all_files.len(),
            parse_failures: filtered.parse_failures,
            dropped_no_logging: filtered.dropped_no_logging,
        };
        manifest.validate().map_err(CliError::Stage)?;
        write_pretty_json(&dir.join("manifest.json"), &manifest)?;

        let counts = BTreeMap::from([
            ("repos_listed".into(), repo_ids.len() as u64),
            ("repos_selected".into(), manifest.selected_repos.len() as u64),
            ("repos_unresolved".into(), manifest.unresolved_repos.len() as u64),
            ("python_files".into(), manifest.total_python_files as u64),
            ("qualifying_files".into(), manifest.qualifying_files.len() as u64),
            ("parse_failures".into(), manifest.parse_failures.len() as u64),
            ("dropped_no_logging".into(), manifest.dropped_no_logging as u64),
        ]);
        Ok(StageWork { counts, failures, outputs: vec!["manifest.json"] })
    })
}

// ---------------------------------------------------------------------
// prepare

struct Prepared {
    logs: Vec<LogStatement>,
    unresolved: u64,
    stripped: StrippedFile,
}

pub fn prepare(ctx: &StageContext) -> Result<bool, CliError> {
    let cfg = ctx.config;
    let manifest_path = ctx.require("mine", "manifest.json")?;
    let inputs = BTreeMap::from([
        tool_input(),
        ("manifest".into(), digest_file(&manifest_path)?),
        ("checkouts".into(), digest_dir(&cfg.corpus.checkouts_dir)?),
        ("extraction".into(), digest_json(&cfg.extraction)),
    ]);
    run_stage(ctx, "prepare", inputs, |dir| {
        let manifest = read_manifest(ctx)?;
        let extraction = cfg.extraction.to_config()?;
        let repo_of: BTreeMap<String, String> = manifest
            .selected_repos
            .iter()
            .map(|r| (repo_file_stem(&r.repo_id), r.repo_id.clone()))
            .collect();

        let results: Vec<(String, Result<Prepared, String>)> = manifest
            .qualifying_files
            .par_iter()
            .map(|file_id| {
                let run = || -> Result<Prepared, String> {
                    let path = cfg.corpus.checkouts_dir.join(file_id);
                    let content = read_text_lossy(&path).map_err(|e| e.to_string())?;
                    let stem = file_id.split('/').next().unwrap_or_default();
                    let repo_id = repo_of
                        .get(stem)
                        .cloned()
                        .unwrap_or_else(|| stem.replace("__", "/"));
                    let file = SourceFile::new(repo_id, file_id.clone(), content);
                    let extraction_out =
                        extract_logs(&file, Origin::Gt, &extraction).map_err(|e| e.to_string())?;
                    let stripped = strip_file(&file, &extraction).map_err(|e| e.to_string())?;
                    Ok(Prepared {
                        logs: extraction_out.logs,
                        unresolved: extraction_out.unresolved.len() as u64,
                        stripped,
                    })
                };
                (file_id.clone(), run())
            })
            .collect();

        let stripped_root = dir.join("stripped");
        reset_dir(&stripped_root)?;
        let mut gt_logs: Vec<LogStatement> = Vec::new();
        let mut failures = Vec::new();
        let mut files = 0u64;
        let mut unresolved = 0u64;
        let mut removed_logs = 0u64;
        let mut removed_comment_lines = 0u64;
        for (file_id, result) in results {
            match result {
                Ok(prepared) => {
                    files += 1;
                    unresolved += prepared.unresolved;
                    removed_logs += prepared.stripped.removed_logs as u64;
                    removed_comment_lines += prepared.stripped.removed_comment_lines as u64;
                    write_tree_file(&stripped_root, &file_id, &prepared.stripped.content)?;
                    gt_logs.extend(prepared.logs);
                }
                Err(reason) => failures.push(format!("{file_id}: {reason}")),
            }
        }
        gt_logs.sort_by(|a, b| a.file_id.cmp(&b.file_id).then(a.line.cmp(&b.line)));
        write_jsonl(&dir.join("gt_logs.jsonl"), &gt_logs)
            .map_err(|e| stage_io("write gt_logs.jsonl", e))?;

        let counts = BTreeMap::from([
            ("files".into(), files),
            ("gt_logs".into(), gt_logs.len() as u64),
            ("unresolved_levels".into(), unresolved),
            ("removed_logs".into(), removed_logs),
            ("removed_comment_lines".into(), removed_comment_lines),
        ]);
        Ok(StageWork { counts, failures, outputs: vec!["gt_logs.jsonl", "stripped"] })
    })
}

// ---------------------------------------------------------------------
// generate

fn build_provider(
    ctx: &StageContext,
    generation: &GenerationConfig,
) -> Result<Box<dyn Provider>, CliError> {
    match ctx.config.generation.provider.as_str() {
        "mock" => Ok(Box::new(MockLoggerProvider)),
        "replay" => {
            let dir = ctx
                .config
                .generation
                .replay_dir
                .clone()
                .unwrap_or_else(|| ctx.cache_dir());
            Ok(Box::new(ReplayProvider::new(dir)))
        }
        "http" => {
            if ctx.offline {
                return Err(CliError::Config("the http provider cannot run offline".into()));
            }
            let endpoint = std::env::var(HttpChatProvider::ENDPOINT_VAR)
                .ok()
                .or_else(|| ctx.config.generation.endpoint.clone())
                .unwrap_or_else(|| "https://api.openai.com/v1".into());
            let key = std::env::var(HttpChatProvider::API_KEY_VAR).map_err(|_| {
                CliError::Config(format!(
                    "the http provider needs an API key in {}",
                    HttpChatProvider::API_KEY_VAR
                ))
            })?;
            Ok(Box::new(HttpChatProvider::new(endpoint, Some(key), generation.request_timeout)))
        }
        other => Err(CliError::Config(format!("unknown provider {other:?}"))),
    }
}

pub fn generate(ctx: &StageContext) -> Result<bool, CliError> {
    let cfg = ctx.config;
    let stripped_root = ctx.require("prepare", "stripped")?;
    let inputs = BTreeMap::from([
        tool_input(),
        ("stripped".into(), digest_dir(&stripped_root)?),
        ("generation".into(), digest_json(&cfg.generation)),
    ]);
    run_stage(ctx, "generate", inputs, |dir| {
        let generation = cfg.generation.to_config();
        let provider = build_provider(ctx, &generation)?;
        let cache = PromptCache::new(ctx.cache_dir());

        let mut file_ids: Vec<String> = Vec::new();
        for entry in walkdir::WalkDir::new(&stripped_root).sort_by_file_name() {
            let entry = entry.map_err(|e| stage_io("walk stripped", e))?;
            if entry.file_type().is_file() {
                let rel = entry
                    .path()
                    .strip_prefix(&stripped_root)
                    .expect("entry under walk root")
                    .to_string_lossy()
                    .replace('\\', "/");
                file_ids.push(rel);
            }
        }
        file_ids.sort();

        let results: Vec<(String, Result<GenerationRecord, GenerationError>)> = file_ids
            .par_iter()
            .map(|file_id| {
                let run = || -> Result<GenerationRecord, GenerationError> {
                    let content = read_text_lossy(&stripped_root.join(file_id))?;
                    let stripped = StrippedFile {
                        file_id: file_id.clone(),
                        content,
                        removed_logs: 0,
                        removed_comment_lines: 0,
                    };
                    generation::generate(&stripped, &generation, provider.as_ref(), &cache)
                };
                (file_id.clone(), run())
            })
            .collect();

        let generated_root = dir.join("generated");
        reset_dir(&generated_root)?;
        let mut records = Vec::new();
        let mut failures = Vec::new();
        let mut invalid = 0u64;
        let mut cached = 0u64;
        for (file_id, result) in results {
            match result {
                Ok(record) => {
                    if !record.valid {
                        invalid += 1;
                    } else {
                        write_tree_file(&generated_root, &file_id, &record.generated_source)?;
                    }
                    if record.provider_metadata.contains_key("cached") {
                        cached += 1;
                    }
                    records.push(record);
                }
                Err(e) => failures.push(format!("{file_id}: {e}")),
            }
        }
        records.sort_by(|a, b| a.file_id.cmp(&b.file_id));
        write_jsonl(&dir.join("generations.jsonl"), &records)
            .map_err(|e| stage_io("write generations.jsonl", e))?;

        let counts = BTreeMap::from([
            ("files".into(), file_ids.len() as u64),
            ("generated".into(), records.len() as u64),
            ("invalid_generations".into(), invalid),
            ("cache_hits".into(), cached),
        ]);
        Ok(StageWork { counts, failures, outputs: vec!["generations.jsonl", "generated"] })
    })
}

// ---------------------------------------------------------------------
// extract

pub fn extract(ctx: &StageContext) -> Result<bool, CliError> {
    let cfg = ctx.config;
    let gt_path = ctx.require("prepare", "gt_logs.jsonl")?;
    let generations_path = ctx.require("generate", "generations.jsonl")?;
    let inputs = BTreeMap::from([
        tool_input(),
        ("gt_logs".into(), digest_file(&gt_path)?),
        ("generations".into(), digest_file(&generations_path)?),
        ("extraction".into(), digest_json(&cfg.extraction)),
    ]);
    run_stage(ctx, "extract", inputs, |dir| {
        let extraction = cfg.extraction.to_config()?;
        let gt_logs: Vec<LogStatement> =
            read_jsonl(&gt_path).map_err(|e| stage_io("read gt_logs.jsonl", e))?;
        let generations: Vec<GenerationRecord> =
            read_jsonl(&generations_path).map_err(|e| stage_io("read generations.jsonl", e))?;
        let repo_of: BTreeMap<&str, &str> = gt_logs
            .iter()
            .map(|log| (log.file_id.as_str(), log.repo_id.as_str()))
            .collect();

        let mut failures = Vec::new();
        let mut unresolved = 0u64;
        let valid: Vec<&GenerationRecord> = generations
            .iter()
            .filter(|record| {
                if !record.valid {
                    failures.push(format!(
                        "{}: generation did not parse ({})",
                        record.file_id,
                        record.parse_error.as_deref().unwrap_or("unknown position")
                    ));
                }
                record.valid
            })
            .collect();
        let extractions: Vec<Result<(Vec<LogStatement>, u64), String>> = valid
            .par_iter()
            .map(|record| {
                let repo_id = repo_of
                    .get(record.file_id.as_str())
                    .map(|r| r.to_string())
                    .unwrap_or_else(|| {
                        record.file_id.split('/').next().unwrap_or_default().replace("__", "/")
                    });
                let file =
                    SourceFile::new(repo_id, record.file_id.clone(), record.generated_source.clone());
                extract_logs(&file, Origin::Llm, &extraction)
                    .map(|e| (e.logs, e.unresolved.len() as u64))
                    .map_err(|e| format!("{}: {e}", record.file_id))
            })
            .collect();

        let mut all_logs = gt_logs;
        for result in extractions {
            match result {
                Ok((logs, n_unresolved)) => {
                    unresolved += n_unresolved;
                    all_logs.extend(logs);
                }
                Err(reason) => failures.push(reason),
            }
        }
        all_logs.sort_by(|a, b| {
            a.file_id
                .cmp(&b.file_id)
                .then_with(|| matches!(a.origin, Origin::Llm).cmp(&matches!(b.origin, Origin::Llm)))
                .then(a.line.cmp(&b.line))
        });
        write_jsonl(&dir.join("logs.jsonl"), &all_logs)
            .map_err(|e| stage_io("write logs.jsonl", e))?;

        let gt_count = all_logs.iter().filter(|l| matches!(l.origin, Origin::Gt)).count() as u64;
        let counts = BTreeMap::from([
            ("gt_logs".into(), gt_count),
            ("llm_logs".into(), all_logs.len() as u64 - gt_count),
            ("llm_unresolved_levels".into(), unresolved),
            ("invalid_generations".into(), generations.iter().filter(|g| !g.valid).count() as u64),
        ]);
        Ok(StageWork { counts, failures, outputs: vec!["logs.jsonl"] })
    })
}

// ---------------------------------------------------------------------
// pair and downstream

fn load_pairing(path: &Path) -> Result<PairingOutcome, CliError> {
    let logs: Vec<LogStatement> = read_jsonl(path).map_err(|e| stage_io("read logs.jsonl", e))?;
    let (gt, llm): (Vec<_>, Vec<_>) =
        logs.into_iter().partition(|log| matches!(log.origin, Origin::Gt));
    Ok(pair_logs(&index_by_path(gt), &index_by_path(llm)))
}

pub fn pair(ctx: &StageContext) -> Result<bool, CliError> {
    let logs_path = ctx.require("extract", "logs.jsonl")?;
    let inputs = BTreeMap::from([tool_input(), ("logs".into(), digest_file(&logs_path)?)]);
    run_stage(ctx, "pair", inputs, |dir| {
        let outcome = load_pairing(&logs_path)?;
        let records = pair_records(&outcome);
        write_jsonl(&dir.join("pairs.jsonl"), &records)
            .map_err(|e| stage_io("write pairs.jsonl", e))?;

        let mut unpaired = outcome.unpaired_llm.clone();
        unpaired.sort_by(|a, b| {
            (&a.log.file_id, a.log.path.as_string(), a.log.line).cmp(&(
                &b.log.file_id,
                b.log.path.as_string(),
                b.log.line,
            ))
        });
        write_jsonl(&dir.join("unpaired.jsonl"), &unpaired)
            .map_err(|e| stage_io("write unpaired.jsonl", e))?;

        let with_llm = outcome.pairs.iter().filter(|p| p.llm.is_some()).count() as u64;
        let counts = BTreeMap::from([
            ("pairs".into(), outcome.pairs.len() as u64),
            ("pairs_with_llm".into(), with_llm),
            ("gt_only_pairs".into(), outcome.pairs.len() as u64 - with_llm),
            ("excluded_llm".into(), unpaired.iter().filter(|u| u.excluded).count() as u64),
            ("novel_llm".into(), unpaired.iter().filter(|u| !u.excluded).count() as u64),
            ("buckets".into(), outcome.bucket_table.len() as u64),
        ]);
        Ok(StageWork { counts, failures: Vec::new(), outputs: vec!["pairs.jsonl", "unpaired.jsonl"] })
    })
}

/// Identity stamp written into metrics.json.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunStamp {
    pub provider: String,
    pub model: String,
    pub seed: u64,
}

/// The metrics.json document.
#[derive(Debug, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub run: RunStamp,
    pub counts: BTreeMap<String, u64>,
    pub placement: PlacementReport,
    /// `None` when no pair had an LLM side to score.
    pub ingredients: Option<IngredientReport>,
}

pub fn evaluate(ctx: &StageContext) -> Result<bool, CliError> {
    let logs_path = ctx.require("extract", "logs.jsonl")?;
    let pairs_path = ctx.require("pair", "pairs.jsonl")?;
    let inputs = BTreeMap::from([
        tool_input(),
        ("logs".into(), digest_file(&logs_path)?),
        ("pairs".into(), digest_file(&pairs_path)?),
    ]);
    run_stage(ctx, "evaluate", inputs, |dir| {
        let outcome = load_pairing(&logs_path)?;
        let placement = placement_metrics(&outcome.bucket_table)
            .map_err(|e| CliError::Stage(format!("placement metrics: {e}")))?;
        let ingredients = ingredient_report(&outcome.pairs).ok();

        let per_pair: Vec<_> = outcome.pairs.iter().filter_map(pair_metrics).collect();
        write_jsonl(&dir.join("pair_metrics.jsonl"), &per_pair)
            .map_err(|e| stage_io("write pair_metrics.jsonl", e))?;

        let gt_logs =
            outcome.bucket_table.iter().map(|b| b.gt_count as u64).sum::<u64>();
        let llm_logs =
            outcome.bucket_table.iter().map(|b| b.llm_count as u64).sum::<u64>();
        let counts = BTreeMap::from([
            ("gt_logs".into(), gt_logs),
            ("llm_logs".into(), llm_logs),
            ("buckets".into(), outcome.bucket_table.len() as u64),
            ("pairs_scored".into(), per_pair.len() as u64),
        ]);
        let document = MetricsDocument {
            run: RunStamp {
                provider: ctx.config.generation.provider.clone(),
                model: ctx.config.generation.model_id.clone(),
                seed: ctx.config.run.seed,
            },
            counts: counts.clone(),
            placement,
            ingredients,
        };
        write_pretty_json(&dir.join("metrics.json"), &document)?;
        Ok(StageWork {
            counts,
            failures: Vec::new(),
            outputs: vec!["metrics.json", "pair_metrics.jsonl"],
        })
    })
}

pub fn categorize(ctx: &StageContext) -> Result<bool, CliError> {
    let logs_path = ctx.require("extract", "logs.jsonl")?;
    ctx.require("evaluate", "metrics.json")?;
    let inputs = BTreeMap::from([tool_input(), ("logs".into(), digest_file(&logs_path)?)]);
    run_stage(ctx, "categorize", inputs, |dir| {
        let outcome = load_pairing(&logs_path)?;
        let records = categorize_pairs(&outcome);
        write_jsonl(&dir.join("categorized.jsonl"), &records)
            .map_err(|e| stage_io("write categorized.jsonl", e))?;
        let mut counts: BTreeMap<String, u64> =
            BTreeMap::from([("records".into(), records.len() as u64)]);
        for record in &records {
            *counts.entry(record.category.name().to_string()).or_insert(0) += 1;
        }
        Ok(StageWork { counts, failures: Vec::new(), outputs: vec!["categorized.jsonl"] })
    })
}

pub fn sample(ctx: &StageContext) -> Result<bool, CliError> {
    let cfg = ctx.config;
    let categorized_path = ctx.require("categorize", "categorized.jsonl")?;
    let generated_root = ctx.require("generate", "generated")?;
    let inputs = BTreeMap::from([
        tool_input(),
        ("categorized".into(), digest_file(&categorized_path)?),
        ("sampling".into(), digest_json(&(&cfg.sampling, cfg.run.seed))),
        ("checkouts".into(), digest_dir(&cfg.corpus.checkouts_dir)?),
        ("generated".into(), digest_dir(&generated_root)?),
    ]);
    run_stage(ctx, "sample", inputs, |dir| {
        let records: Vec<CategorizedRecord> =
            read_jsonl(&categorized_path).map_err(|e| stage_io("read categorized.jsonl", e))?;
        let plan =
            plan_sample(&records, cfg.sampling.confidence, cfg.sampling.margin, cfg.run.seed);
        write_pretty_json(&dir.join("sample_plan.json"), &plan)?;
        let sampled = stratified_sample(&records, &plan);
        write_jsonl(&dir.join("sample.jsonl"), &sampled)
            .map_err(|e| stage_io("write sample.jsonl", e))?;

        let lookup = |file_id: &str, origin: Origin| -> Option<String> {
            let path = match origin {
                Origin::Gt => cfg.corpus.checkouts_dir.join(file_id),
                Origin::Llm => generated_root.join(file_id),
            };
            read_text_lossy(&path).ok()
        };
        let mut csv_bytes = Vec::new();
        emit_review_sheet(&sampled, &lookup, &mut csv_bytes)
            .map_err(|e| CliError::Stage(format!("review sheet: {e}")))?;
        write_atomic(&dir.join("review_sheet.csv"), &csv_bytes)
            .map_err(|e| stage_io("write review_sheet.csv", e))?;

        let mut counts: BTreeMap<String, u64> = BTreeMap::from([
            ("population".into(), plan.population as u64),
            ("sample_n".into(), plan.total_n as u64),
        ]);
        for (category, n) in &plan.allocation {
            counts.insert(format!("alloc_{}", category.name()), *n as u64);
        }
        Ok(StageWork {
            counts,
            failures: Vec::new(),
            outputs: vec!["sample_plan.json", "sample.jsonl", "review_sheet.csv"],
        })
    })
}

pub fn report(ctx: &StageContext) -> Result<bool, CliError> {
    let metrics_path = ctx.require("evaluate", "metrics.json")?;
    let categorized_path = ctx.require("categorize", "categorized.jsonl")?;
    ctx.require("sample", "sample_plan.json")?;
    let inputs = BTreeMap::from([
        tool_input(),
        ("metrics".into(), digest_file(&metrics_path)?),
        ("categorized".into(), digest_file(&categorized_path)?),
    ]);
    run_stage(ctx, "report", inputs, |dir| {
        let metrics: MetricsDocument = serde_json::from_str(
            &std::fs::read_to_string(&metrics_path).map_err(|e| stage_io("read metrics.json", e))?,
        )
        .map_err(|e| CliError::Stage(format!("metrics.json: {e}")))?;
        let records: Vec<CategorizedRecord> =
            read_jsonl(&categorized_path).map_err(|e| stage_io("read categorized.jsonl", e))?;
        let rendered = super::render_report(&metrics, &records);
        write_atomic(&dir.join("report.md"), rendered.as_bytes())
            .map_err(|e| stage_io("write report.md", e))?;
        let counts = BTreeMap::from([("categorized_records".into(), records.len() as u64)]);
        Ok(StageWork { counts, failures: Vec::new(), outputs: vec!["report.md"] })
    })
}
