//! Repository selection, file ingestion, and the logging-use filter.
//!
//! Selection keeps active, non-toy Python projects: stars and contributor
//! floors plus a push-recency window, all evaluated against a fixed
//! snapshot date. Metadata comes from the hosting platform's REST API or
//! from an offline fixture directory with the same record shape, so the
//! rest of the pipeline never needs the network.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::source::{extract_logs, ExtractionConfig, Origin, SourceFile};

/// Snapshot of one repository's hosting metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepoRecord {
    /// "owner/name".
    pub repo_id: String,
    pub stars: u64,
    pub commits: u64,
    pub contributors: u64,
    pub last_push: DateTime<Utc>,
    pub created_at: DateTime<Utc>,
    pub primary_language: String,
}

impl RepoRecord {
    pub fn validate(&self) -> Result<(), String> {
        if self.last_push < self.created_at {
            return Err(format!(
                "{}: last push {} precedes creation {}",
                self.repo_id, self.last_push, self.created_at
            ));
        }
        Ok(())
    }
}

/// Thresholds for project selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionCriteria {
    pub language: String,
    pub min_stars: u64,
    pub min_contributors: u64,
    pub max_days_since_push: i64,
}

impl Default for SelectionCriteria {
    fn default() -> Self {
        SelectionCriteria {
            language: "Python".into(),
            min_stars: 50,
            min_contributors: 3,
            max_days_since_push: 365,
        }
    }
}

/// Keep records meeting every threshold as of `as_of`.
pub fn select_repos(
    records: &[RepoRecord],
    criteria: &SelectionCriteria,
    as_of: NaiveDate,
) -> Vec<RepoRecord> {
    records
        .iter()
        .filter(|r| {
            r.primary_language.eq_ignore_ascii_case(&criteria.language)
                && r.stars >= criteria.min_stars
                && r.contributors >= criteria.min_contributors
                && (as_of - r.last_push.date_naive()).num_days() <= criteria.max_days_since_push
        })
        .cloned()
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("rate limited; retry after {retry_after_secs}s")]
    RateLimited { retry_after_secs: u64 },
    #[error("authentication rejected: {0}")]
    Auth(String),
    #[error("{0}")]
    Http(String),
}

/// Where repository metadata comes from.
pub enum MetadataSource {
    /// Directory of `<owner>__<name>.json` files holding [`RepoRecord`]s.
    FixtureDir(PathBuf),
    /// Hosting platform REST API; token read from `LOGSTUDY_GITHUB_TOKEN`.
    GitHubApi { endpoint: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnresolvedRepo {
    pub repo_id: String,
    pub reason: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct FetchOutcome {
    pub records: Vec<RepoRecord>,
    pub unresolved: Vec<UnresolvedRepo>,
}

/// File name a repo's fixture record lives under.
pub fn repo_file_stem(repo_id: &str) -> String {
    repo_id.replace('/', "__")
}

/// One record per resolvable repo id; unresolvable ids are reported in
/// the outcome, never fatal. Fixture mode touches no network.
pub fn fetch_metadata(
    repo_ids: &[String],
    source: &MetadataSource,
) -> Result<FetchOutcome, CorpusError> {
    let mut outcome = FetchOutcome::default();
    for repo_id in repo_ids {
        let fetched = match source {
            MetadataSource::FixtureDir(dir) => fetch_fixture(repo_id, dir),
            MetadataSource::GitHubApi { endpoint } => fetch_github(repo_id, endpoint)?,
        };
        match fetched {
            Ok(record) => match record.validate() {
                Ok(()) => outcome.records.push(record),
                Err(reason) => {
                    outcome.unresolved.push(UnresolvedRepo { repo_id: repo_id.clone(), reason })
                }
            },
            Err(reason) => {
                outcome.unresolved.push(UnresolvedRepo { repo_id: repo_id.clone(), reason })
            }
        }
    }
    Ok(outcome)
}

fn fetch_fixture(repo_id: &str, dir: &Path) -> Result<RepoRecord, String> {
    let path = dir.join(format!("{}.json", repo_file_stem(repo_id)));
    let text = std::fs::read_to_string(&path).map_err(|e| format!("no metadata record: {e}"))?;
    serde_json::from_str(&text).map_err(|e| format!("bad metadata record: {e}"))
}

#[derive(Debug, Deserialize)]
struct ApiRepo {
    full_name: String,
    stargazers_count: u64,
    language: Option<String>,
    pushed_at: DateTime<Utc>,
    created_at: DateTime<Utc>,
}

/// Build a record from the platform's repository payload plus its
/// contributors listing. Contributor and commit counts are taken from the
/// first page of that listing (count of entries, sum of their
/// contributions), so both are floors when the listing truncates.
pub fn repo_record_from_api(
    repo_payload: &serde_json::Value,
    contributors_payload: &serde_json::Value,
) -> Result<RepoRecord, String> {
    let repo: ApiRepo =
        serde_json::from_value(repo_payload.clone()).map_err(|e| format!("repository payload: {e}"))?;
    let listing = contributors_payload
        .as_array()
        .ok_or("contributors payload is not an array")?;
    let commits = listing
        .iter()
        .filter_map(|c| c.get("contributions").and_then(|v| v.as_u64()))
        .sum();
    Ok(RepoRecord {
        repo_id: repo.full_name,
        stars: repo.stargazers_count,
        commits,
        contributors: listing.len() as u64,
        last_push: repo.pushed_at,
        created_at: repo.created_at,
        primary_language: repo.language.unwrap_or_default(),
    })
}

fn fetch_github(repo_id: &str, endpoint: &str) -> Result<Result<RepoRecord, String>, CorpusError> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(std::time::Duration::from_secs(30)))
        .build()
        .into();
    let token = std::env::var("LOGSTUDY_GITHUB_TOKEN").ok();
    let base = endpoint.trim_end_matches('/');
    let get = |url: &str| -> Result<(u16, serde_json::Value, Option<u64>), CorpusError> {
        let mut builder = agent
            .get(url)
            .header("user-agent", "logstudy")
            .header("accept", "application/vnd.github+json");
        if let Some(token) = &token {
            builder = builder.header("authorization", &format!("Bearer {token}"));
        }
        let mut response = builder.call().map_err(|e| CorpusError::Http(e.to_string()))?;
        let status = response.status().as_u16();
        let retry_after = response
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.parse().ok());
        let body = response
            .body_mut()
            .read_json()
            .unwrap_or(serde_json::Value::Null);
        Ok((status, body, retry_after))
    };

    let (status, repo_payload, retry_after) = get(&format!("{base}/repos/{repo_id}"))?;
    match status {
        200 => {}
        404 => return Ok(Err("repository not found".into())),
        401 => return Err(CorpusError::Auth("token rejected".into())),
        403 | 429 => {
            return Err(CorpusError::RateLimited { retry_after_secs: retry_after.unwrap_or(60) })
        }
        other => return Err(CorpusError::Http(format!("{repo_id}: status {other}"))),
    }
    let (status, contributors, retry_after) =
        get(&format!("{base}/repos/{repo_id}/contributors?per_page=100&anon=1"))?;
    match status {
        // 204: platform answers empty for repos with no commits.
        200 | 204 => {}
        403 | 429 => {
            return Err(CorpusError::RateLimited { retry_after_secs: retry_after.unwrap_or(60) })
        }
        other => return Err(CorpusError::Http(format!("{repo_id} contributors: status {other}"))),
    }
    let contributors = if contributors.is_array() { contributors } else { serde_json::json!([]) };
    Ok(repo_record_from_api(&repo_payload, &contributors))
}

/// One ingested file plus read diagnostics.
#[derive(Debug, Clone)]
pub struct CollectedFile {
    /// Repo-relative path with `/` separators.
    pub rel_path: String,
    pub content: String,
    /// True when invalid UTF-8 was replaced during decoding.
    pub lossy_utf8: bool,
}

#[derive(Debug, Default)]
pub struct CollectedFiles {
    pub files: Vec<CollectedFile>,
    /// (rel_path, error) for files that could not be read.
    pub skipped: Vec<(String, String)>,
}

/// All `.py` files under a checkout, sorted by relative path. The version
/// control metadata directory is not source and is ignored.
pub fn collect_files(checkout_dir: &Path) -> io::Result<CollectedFiles> {
    if !checkout_dir.is_dir() {
        return Err(io::Error::new(
            io::ErrorKind::NotFound,
            format!("checkout {checkout_dir:?} is not a directory"),
        ));
    }
    let mut out = CollectedFiles::default();
    let walker = WalkDir::new(checkout_dir)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.file_name() != ".git");
    for entry in walker {
        let entry = match entry {
            Ok(entry) => entry,
            Err(e) => {
                out.skipped.push((format!("{e}"), "walk error".into()));
                continue;
            }
        };
        if !entry.file_type().is_file()
            || entry.path().extension().map_or(true, |ext| ext != "py")
        {
            continue;
        }
        let rel_path = entry
            .path()
            .strip_prefix(checkout_dir)
            .expect("entry is under the walk root")
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        match std::fs::read(entry.path()) {
            Ok(bytes) => {
                let content = String::from_utf8_lossy(&bytes);
                let lossy_utf8 = matches!(content, std::borrow::Cow::Owned(_));
                out.files.push(CollectedFile { rel_path, content: content.into_owned(), lossy_utf8 });
            }
            Err(e) => out.skipped.push((rel_path, e.to_string())),
        }
    }
    out.files.sort_by(|a, b| a.rel_path.cmp(&b.rel_path));
    Ok(out)
}

/// Corpus-wide file ids: `<owner>__<name>/<rel_path>`.
pub fn file_id(repo_id: &str, rel_path: &str) -> String {
    format!("{}/{rel_path}", repo_file_stem(repo_id))
}

/// Ingest a checkout into corpus-addressable source files.
pub fn ingest_repo(repo_id: &str, checkout_dir: &Path) -> io::Result<(Vec<SourceFile>, Vec<(String, String)>)> {
    let collected = collect_files(checkout_dir)?;
    let files = collected
        .files
        .into_iter()
        .map(|f| SourceFile {
            repo_id: repo_id.to_string(),
            file_id: file_id(repo_id, &f.rel_path),
            content: f.content,
        })
        .collect();
    Ok((files, collected.skipped))
}

/// True when the file imports the standard logging library in any form:
/// `import logging`, `import logging.handlers as h`, `from logging import
/// getLogger`, `from logging.config import ...`, at any nesting depth.
pub fn imports_logging(content: &str) -> bool {
    let Ok(tree) = crate::source::parse(content) else {
        return false;
    };
    let mut stack = vec![tree.root_node()];
    while let Some(node) = stack.pop() {
        let mut cursor = node.walk();
        for child in node.children(&mut cursor) {
            stack.push(child);
        }
        let hit = match node.kind() {
            "import_statement" => {
                let mut cursor = node.walk();
                let names: Vec<_> = node.named_children(&mut cursor).collect();
                names.into_iter().any(|child| {
                    let dotted = match child.kind() {
                        "dotted_name" => Some(child),
                        "aliased_import" => child.child_by_field_name("name"),
                        _ => None,
                    };
                    dotted.is_some_and(|d| first_dotted_component(d, content) == Some("logging"))
                })
            }
            "import_from_statement" => node
                .child_by_field_name("module_name")
                .is_some_and(|m| first_dotted_component(m, content) == Some("logging")),
            _ => false,
        };
        if hit {
            return true;
        }
    }
    false
}

fn first_dotted_component<'a>(dotted: tree_sitter::Node, source: &'a str) -> Option<&'a str> {
    if dotted.kind() != "dotted_name" {
        return None;
    }
    let first = dotted.named_child(0)?;
    Some(&source[first.byte_range()])
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub kept: Vec<SourceFile>,
    pub parse_failures: Vec<String>,
    pub dropped_no_logging: usize,
}

/// Keep files that import the logging library and that yield at least one
/// extractable log statement. Parse failures are excluded and listed.
pub fn filter_logged_files(files: &[SourceFile], cfg: &ExtractionConfig) -> FilterOutcome {
    let mut outcome = FilterOutcome::default();
    for file in files {
        match extract_logs(file, Origin::Gt, cfg) {
            Err(_) => outcome.parse_failures.push(file.file_id.clone()),
            Ok(extraction) => {
                if imports_logging(&file.content) && !extraction.logs.is_empty() {
                    outcome.kept.push(file.clone());
                } else {
                    outcome.dropped_no_logging += 1;
                }
            }
        }
    }
    outcome
}

/// Mean/median/min/max of one descriptive field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

fn field_stats(mut values: Vec<f64>) -> Option<FieldStats> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    };
    Some(FieldStats {
        mean: values.iter().sum::<f64>() / n as f64,
        median,
        min: values[0],
        max: values[n - 1],
    })
}

/// Descriptive statistics over the selected projects: stars, commits,
/// contributors, days since last push, and age in years, keyed by field.
pub fn corpus_stats(repos: &[RepoRecord], as_of: NaiveDate) -> BTreeMap<String, FieldStats> {
    let mut stats = BTreeMap::new();
    let mut put = |name: &str, values: Vec<f64>| {
        if let Some(s) = field_stats(values) {
            stats.insert(name.to_string(), s);
        }
    };
    put("stars", repos.iter().map(|r| r.stars as f64).collect());
    put("commits", repos.iter().map(|r| r.commits as f64).collect());
    put("contributors", repos.iter().map(|r| r.contributors as f64).collect());
    put(
        "days_since_push",
        repos.iter().map(|r| (as_of - r.last_push.date_naive()).num_days() as f64).collect(),
    );
    put(
        "age_years",
        repos
            .iter()
            .map(|r| (as_of - r.created_at.date_naive()).num_days() as f64 / 365.25)
            .collect(),
    );
    stats
}

/// Everything downstream stages need to know about the corpus snapshot.
#[derive(Debug, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub snapshot_date: NaiveDate,
    pub selected_repos: Vec<RepoRecord>,
    pub unresolved_repos: Vec<UnresolvedRepo>,
    pub qualifying_files: Vec<String>,
    pub total_python_files: usize,
    pub parse_failures: Vec<String>,
    pub dropped_no_logging: usize,
    pub stats: BTreeMap<String, FieldStats>,
}

impl CorpusManifest {
    /// Every qualifying file must live under a selected repo's directory.
    pub fn validate(&self) -> Result<(), String> {
        let stems: Vec<String> = self
            .selected_repos
            .iter()
            .map(|r| format!("{}/", repo_file_stem(&r.repo_id)))
            .collect();
        for file in &self.qualifying_files {
            if !stems.iter().any(|stem| file.starts_with(stem.as_str())) {
                return Err(format!("qualifying file {file} belongs to no selected repo"));
            }
        }
        Ok(())
    }
}

/// Parse a repo list: one `owner/name` per line, `#` comments and blank
/// lines ignored.
pub fn read_repo_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .map(str::to_string)
        .collect()
}
