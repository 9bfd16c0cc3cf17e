//! GT/LLM log pairing.
//!
//! Logs are bucketed by (file, code path); inside a bucket each GT log
//! independently selects the most similar LLM log by TF cosine over the raw
//! statement text. LLM logs no GT log selects are excluded from evaluation
//! but reported. GT logs are always retained, as pairs without an LLM side
//! when their bucket has none.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::source::LogStatement;
use crate::util::tokenize;

/// Logs grouped by (file_id, path string), lists in line order.
pub type LogIndex = BTreeMap<(String, String), Vec<LogStatement>>;

/// Bucket shape, named from the GT:LLM count pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    OneOne,
    OneN,
    NOne,
    NN,
    GtOnly,
}

/// A GT log with its selected LLM counterpart, if any.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogPair {
    pub gt: LogStatement,
    pub llm: Option<LogStatement>,
    /// Cosine similarity of the raw statements; absent when `llm` is.
    pub similarity: Option<f64>,
    pub scenario: Scenario,
}

/// An LLM log that entered no pair. `excluded` marks matching losers in
/// buckets that had GT logs; `false` means the whole path had no GT log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnpairedLlm {
    pub log: LogStatement,
    pub excluded: bool,
}

/// Per-bucket log counts, the input to placement metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BucketCounts {
    pub file_id: String,
    pub path: String,
    pub gt_count: usize,
    pub llm_count: usize,
}

/// Full result of pairing two log indexes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairingOutcome {
    pub pairs: Vec<LogPair>,
    pub unpaired_llm: Vec<UnpairedLlm>,
    pub bucket_table: Vec<BucketCounts>,
}

/// Group logs by (file_id, path), each list sorted by line (stable, so
/// same-line logs keep their extraction order).
pub fn index_by_path<I: IntoIterator<Item = LogStatement>>(logs: I) -> LogIndex {
    let mut index: LogIndex = BTreeMap::new();
    for log in logs {
        index
            .entry((log.file_id.clone(), log.path.as_string()))
            .or_default()
            .push(log);
    }
    for bucket in index.values_mut() {
        bucket.sort_by_key(|log| log.line);
    }
    index
}

/// TF cosine similarity over the raw statement texts. Both token sets
/// empty → 1; exactly one empty → 0.
pub fn statement_similarity(a: &LogStatement, b: &LogStatement) -> f64 {
    text_similarity(&a.raw, &b.raw)
}

fn text_similarity(a: &str, b: &str) -> f64 {
    let ta = tokenize(a);
    let tb = tokenize(b);
    match (ta.is_empty(), tb.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let mut fa: BTreeMap<&str, f64> = BTreeMap::new();
    for token in &ta {
        *fa.entry(token).or_insert(0.0) += 1.0;
    }
    let mut fb: BTreeMap<&str, f64> = BTreeMap::new();
    for token in &tb {
        *fb.entry(token).or_insert(0.0) += 1.0;
    }
    let dot: f64 = fa
        .iter()
        .filter_map(|(token, wa)| fb.get(token).map(|wb| wa * wb))
        .sum();
    let norm = |freq: &BTreeMap<&str, f64>| freq.values().map(|w| w * w).sum::<f64>().sqrt();
    dot / (norm(&fa) * norm(&fb))
}

/// Pair with the default similarity.
pub fn pair_logs(gt_index: &LogIndex, llm_index: &LogIndex) -> PairingOutcome {
    pair_logs_with(gt_index, llm_index, statement_similarity)
}

/// Pair with an injected similarity function. Each GT log takes the
/// argmax-similarity LLM log in its bucket; ties go to the earlier LLM log
/// (smaller line, then earlier order, which strict comparison preserves).
pub fn pair_logs_with<F>(gt_index: &LogIndex, llm_index: &LogIndex, similarity: F) -> PairingOutcome
where
    F: Fn(&LogStatement, &LogStatement) -> f64,
{
    let mut keys: Vec<&(String, String)> = gt_index.keys().chain(llm_index.keys()).collect();
    keys.sort();
    keys.dedup();

    let empty: Vec<LogStatement> = Vec::new();
    let mut pairs = Vec::new();
    let mut unpaired_llm = Vec::new();
    let mut bucket_table = Vec::new();

    for key in keys {
        let gt_logs = gt_index.get(key).unwrap_or(&empty);
        let llm_logs = llm_index.get(key).unwrap_or(&empty);
        bucket_table.push(BucketCounts {
            file_id: key.0.clone(),
            path: key.1.clone(),
            gt_count: gt_logs.len(),
            llm_count: llm_logs.len(),
        });
        let scenario = match (gt_logs.len(), llm_logs.len()) {
            (_, 0) => Scenario::GtOnly,
            (1, 1) => Scenario::OneOne,
            (1, _) => Scenario::OneN,
            (_, 1) => Scenario::NOne,
            _ => Scenario::NN,
        };
        if gt_logs.is_empty() {
            for llm in llm_logs {
                unpaired_llm.push(UnpairedLlm { log: llm.clone(), excluded: false });
            }
            continue;
        }
        if llm_logs.is_empty() {
            for gt in gt_logs {
                pairs.push(LogPair { gt: gt.clone(), llm: None, similarity: None, scenario });
            }
            continue;
        }
        let mut selected = vec![false; llm_logs.len()];
        for gt in gt_logs {
            let mut best = 0;
            let mut best_sim = f64::NEG_INFINITY;
            for (idx, llm) in llm_logs.iter().enumerate() {
                let sim = similarity(gt, llm);
                if sim > best_sim {
                    best = idx;
                    best_sim = sim;
                }
            }
            selected[best] = true;
            pairs.push(LogPair {
                gt: gt.clone(),
                llm: Some(llm_logs[best].clone()),
                similarity: Some(best_sim),
                scenario,
            });
        }
        for (idx, llm) in llm_logs.iter().enumerate() {
            if !selected[idx] {
                unpaired_llm.push(UnpairedLlm { log: llm.clone(), excluded: true });
            }
        }
    }
    PairingOutcome { pairs, unpaired_llm, bucket_table }
}

/// One line of `pairs.jsonl`. `excluded_llm_lines` lists the bucket's
/// excluded LLM logs and repeats on every pair from that bucket.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairRecord {
    pub file_id: String,
    pub path: String,
    pub scenario: Scenario,
    pub gt_line: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub llm_line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub similarity: Option<f64>,
    pub excluded_llm_lines: Vec<usize>,
}

/// Flatten an outcome into `pairs.jsonl` records.
pub fn pair_records(outcome: &PairingOutcome) -> Vec<PairRecord> {
    let mut excluded_by_bucket: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for unpaired in &outcome.unpaired_llm {
        if unpaired.excluded {
            excluded_by_bucket
                .entry((unpaired.log.file_id.clone(), unpaired.log.path.as_string()))
                .or_default()
                .push(unpaired.log.line);
        }
    }
    outcome
        .pairs
        .iter()
        .map(|pair| {
            let key = (pair.gt.file_id.clone(), pair.gt.path.as_string());
            PairRecord {
                file_id: pair.gt.file_id.clone(),
                path: pair.gt.path.as_string(),
                scenario: pair.scenario,
                gt_line: pair.gt.line,
                llm_line: pair.llm.as_ref().map(|l| l.line),
                similarity: pair.similarity,
                excluded_llm_lines: excluded_by_bucket.get(&key).cloned().unwrap_or_default(),
            }
        })
        .collect()
}
