//! Python source analysis: parsing, code-path assignment, log-statement
//! recognition, and log stripping.
//!
//! A *code path* names the lexical position of a statement as the chain of
//! enclosing scopes from the module root, e.g. `global/Trainer/fit/if1`.
//! Function and class frames use their declared names; control-flow frames
//! use the keyword plus a 1-based occurrence counter scoped to the parent
//! frame (`if1`, `if2`, `else1`, `for1`, `while1`, `try1`, `except1`,
//! `finally1`, `with1`). An `elif` counts as a further `if` within the same
//! parent.

mod extract;
mod parser;
mod recognize;
mod strip;

use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};

pub use extract::{extract_logs, Extraction, UnresolvedLevel};
pub use parser::{parse, parses, ParsePoint};
pub use recognize::{extract_variables, identify_log_call, normalize_template, RecognizedCall};
pub use strip::{strip_file, StrippedFile};

/// Which side of the comparison a log statement came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Origin {
    #[serde(rename = "GT")]
    Gt,
    #[serde(rename = "LLM")]
    Llm,
}

/// Log severity, ordered `debug < info < warning < error < critical`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogLevel {
    Debug,
    Info,
    Warning,
    Error,
    Critical,
}

impl LogLevel {
    /// Rank on the 0..=4 severity scale used by level-distance metrics.
    pub fn ordinal(self) -> u8 {
        match self {
            LogLevel::Debug => 0,
            LogLevel::Info => 1,
            LogLevel::Warning => 2,
            LogLevel::Error => 3,
            LogLevel::Critical => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogLevel::Debug => "debug",
            LogLevel::Info => "info",
            LogLevel::Warning => "warning",
            LogLevel::Error => "error",
            LogLevel::Critical => "critical",
        }
    }

    /// All levels in ascending severity order.
    pub const ALL: [LogLevel; 5] = [
        LogLevel::Debug,
        LogLevel::Info,
        LogLevel::Warning,
        LogLevel::Error,
        LogLevel::Critical,
    ];
}

impl fmt::Display for LogLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Code path of a statement: scope labels from the module root downward.
/// Displayed and serialized as labels joined with `/`, root being `global`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CodePath {
    labels: Vec<String>,
}

impl CodePath {
    /// The module-root path, `global`.
    pub fn global() -> Self {
        CodePath { labels: vec!["global".to_string()] }
    }

    pub fn from_labels<I: IntoIterator<Item = String>>(labels: I) -> Self {
        let labels: Vec<String> = labels.into_iter().collect();
        if labels.is_empty() {
            return CodePath::global();
        }
        CodePath { labels }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn as_string(&self) -> String {
        self.labels.join("/")
    }
}

impl fmt::Display for CodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_string())
    }
}

impl Serialize for CodePath {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.as_string())
    }
}

impl<'de> Deserialize<'de> for CodePath {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(CodePath::from_labels(s.split('/').map(str::to_string)))
    }
}

/// A Python source file, identified within its repository.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceFile {
    pub repo_id: String,
    /// Unique id within the corpus; by convention `repo_id/relative/path.py`.
    pub file_id: String,
    pub content: String,
}

impl SourceFile {
    pub fn new(
        repo_id: impl Into<String>,
        file_id: impl Into<String>,
        content: impl Into<String>,
    ) -> Self {
        SourceFile { repo_id: repo_id.into(), file_id: file_id.into(), content: content.into() }
    }
}

/// One recognized log statement with its placement and ingredients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogStatement {
    pub origin: Origin,
    pub repo_id: String,
    pub file_id: String,
    pub path: CodePath,
    /// 1-based source line of the statement start.
    pub line: usize,
    pub level: LogLevel,
    /// Exact source text of the logging call.
    pub raw: String,
    /// Message text with interpolation placeholders removed and
    /// whitespace collapsed.
    pub template: String,
    /// Interpolated expressions in source order, duplicates dropped.
    pub variables: Vec<String>,
}

/// Controls which receiver names count as loggers during recognition.
#[derive(Debug, Clone)]
pub struct ExtractionConfig {
    logger_pattern: Regex,
}

/// Matches `log`, `logger`, `logging` and private `_`/`__` prefixed forms,
/// case-insensitively.
pub const DEFAULT_LOGGER_PATTERN: &str = r"(?i)^_{0,2}log(ger|ging)?$";

impl ExtractionConfig {
    /// Build a config with a custom receiver pattern.
    pub fn with_pattern(pattern: &str) -> Result<Self, SourceError> {
        let logger_pattern = Regex::new(pattern)
            .map_err(|e| SourceError::InvalidPattern { pattern: pattern.to_string(), reason: e.to_string() })?;
        Ok(ExtractionConfig { logger_pattern })
    }

    pub fn logger_pattern(&self) -> &Regex {
        &self.logger_pattern
    }
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig::with_pattern(DEFAULT_LOGGER_PATTERN).expect("default pattern compiles")
    }
}

/// Errors from source analysis.
#[derive(Debug, thiserror::Error)]
pub enum SourceError {
    #[error("{file_id}:{line}:{column}: Python parse error")]
    Parse { file_id: String, line: usize, column: usize },
    #[error("invalid logger pattern {pattern:?}: {reason}")]
    InvalidPattern { pattern: String, reason: String },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_order_is_ascending() {
        let mut prev = None;
        for level in LogLevel::ALL {
            if let Some(p) = prev {
                assert!(p < level);
            }
            prev = Some(level);
        }
        assert_eq!(LogLevel::Critical.ordinal(), 4);
    }

    #[test]
    fn code_path_round_trips_through_json() {
        let path = CodePath::from_labels(
            ["global", "Trainer", "fit", "if1"].map(String::from),
        );
        let json = serde_json::to_string(&path).unwrap();
        assert_eq!(json, "\"global/Trainer/fit/if1\"");
        let back: CodePath = serde_json::from_str(&json).unwrap();
        assert_eq!(back, path);
    }

    #[test]
    fn default_pattern_accepts_common_receivers() {
        let cfg = ExtractionConfig::default();
        for name in ["log", "logger", "logging", "LOG", "LOGGER", "_logger", "__log", "Logging"] {
            assert!(cfg.logger_pattern().is_match(name), "{name} should match");
        }
        for name in ["mylog", "logs", "logger2", "catalog", "login"] {
            assert!(!cfg.logger_pattern().is_match(name), "{name} should not match");
        }
    }

    #[test]
    fn invalid_pattern_is_reported() {
        assert!(matches!(
            ExtractionConfig::with_pattern("(unclosed"),
            Err(SourceError::InvalidPattern { .. })
        ));
    }
}
