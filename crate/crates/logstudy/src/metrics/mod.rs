//! Placement and ingredient metrics over a pairing outcome.
//!
//! Placement metrics classify (file, path) keys of the merged bucket table;
//! ingredient metrics aggregate per-pair level, variable, and text scores
//! over pairs that have an LLM side. Text metrics compare normalized
//! templates with the LLM side as candidate and the GT side as reference.

pub mod text;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::pairing::{BucketCounts, LogPair, Scenario};
use crate::source::LogLevel;
use crate::util::tokenize;
use text::{bleu, meteor, ntlev, rouge, RougeVariant};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("empty corpus: no (file, path) keys to classify")]
    EmptyCorpus,
    #[error("no pairs with an LLM side")]
    NoPairs,
}

/// Path classification counts behind the placement rates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCounts {
    pub total: usize,
    /// LLM logged, GT did not.
    pub overlogged: usize,
    /// GT logged, LLM did not.
    pub underlogged: usize,
    /// Both logged.
    pub agreeing: usize,
    /// Keys with at least one GT log (coverage denominator).
    pub gt_paths: usize,
}

/// Where the LLM placed logs relative to GT. Fields that average over
/// GT paths are `None` when the corpus has no GT logs at all.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlacementReport {
    /// Share of GT paths where the LLM also logged.
    pub coverage: Option<f64>,
    /// Mean over GT paths of LLM/GT log-count ratio.
    pub quantified_coverage_raw: Option<f64>,
    /// Same with each ratio capped at 1.
    pub quantified_coverage_capped: Option<f64>,
    pub overlogging_rate: f64,
    pub underlogging_rate: f64,
    pub agree_rate: f64,
    /// Total LLM logs over total GT logs.
    pub llm_to_gt_log_ratio: Option<f64>,
    pub path_counts: PathCounts,
}

/// Classify every key of the bucket table and compute coverage rates.
pub fn placement_metrics(bucket_table: &[BucketCounts]) -> Result<PlacementReport, MetricsError> {
    if bucket_table.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let mut counts = PathCounts { total: 0, overlogged: 0, underlogged: 0, agreeing: 0, gt_paths: 0 };
    let mut covered = 0usize;
    let mut qc_raw_sum = 0.0;
    let mut qc_capped_sum = 0.0;
    let mut gt_logs = 0usize;
    let mut llm_logs = 0usize;
    for bucket in bucket_table {
        counts.total += 1;
        gt_logs += bucket.gt_count;
        llm_logs += bucket.llm_count;
        match (bucket.gt_count, bucket.llm_count) {
            (0, 0) => {}
            (0, _) => counts.overlogged += 1,
            (_, 0) => counts.underlogged += 1,
            _ => counts.agreeing += 1,
        }
        if bucket.gt_count > 0 {
            counts.gt_paths += 1;
            if bucket.llm_count > 0 {
                covered += 1;
            }
            let ratio = bucket.llm_count as f64 / bucket.gt_count as f64;
            qc_raw_sum += ratio;
            qc_capped_sum += ratio.min(1.0);
        }
    }
    let total = counts.total as f64;
    let over_gt = |sum: f64| (counts.gt_paths > 0).then(|| sum / counts.gt_paths as f64);
    Ok(PlacementReport {
        coverage: over_gt(covered as f64),
        quantified_coverage_raw: over_gt(qc_raw_sum),
        quantified_coverage_capped: over_gt(qc_capped_sum),
        overlogging_rate: counts.overlogged as f64 / total,
        underlogging_rate: counts.underlogged as f64 / total,
        agree_rate: counts.agreeing as f64 / total,
        llm_to_gt_log_ratio: (gt_logs > 0).then(|| llm_logs as f64 / gt_logs as f64),
        path_counts: counts,
    })
}

fn llm_present(pairs: &[LogPair]) -> Vec<&LogPair> {
    pairs.iter().filter(|p| p.llm.is_some()).collect()
}

/// Fraction of llm-present pairs with exactly matching levels.
pub fn level_accuracy(pairs: &[LogPair]) -> Result<f64, MetricsError> {
    let with_llm = llm_present(pairs);
    if with_llm.is_empty() {
        return Err(MetricsError::NoPairs);
    }
    let matched = with_llm
        .iter()
        .filter(|p| p.llm.as_ref().map(|l| l.level) == Some(p.gt.level))
        .count();
    Ok(matched as f64 / with_llm.len() as f64)
}

/// Per-pair ordinal distance term of the AOD: `1 - |a-s| / max(a, 4-a)`.
pub fn aod_term(gt: LogLevel, llm: LogLevel) -> f64 {
    let a = gt.ordinal() as f64;
    let s = llm.ordinal() as f64;
    1.0 - (a - s).abs() / a.max(4.0 - a)
}

/// Average ordinal distance over llm-present pairs.
pub fn aod(pairs: &[LogPair]) -> Result<f64, MetricsError> {
    let with_llm = llm_present(pairs);
    if with_llm.is_empty() {
        return Err(MetricsError::NoPairs);
    }
    let sum: f64 = with_llm
        .iter()
        .map(|p| aod_term(p.gt.level, p.llm.as_ref().expect("filtered").level))
        .sum();
    Ok(sum / with_llm.len() as f64)
}

/// Share of GT variables the LLM log reproduced, as a set comparison.
/// `None` when the pair has no LLM side or the GT log has no variables.
pub fn variable_coverage(pair: &LogPair) -> Option<f64> {
    let llm = pair.llm.as_ref()?;
    let gt_vars: BTreeSet<&String> = pair.gt.variables.iter().collect();
    if gt_vars.is_empty() {
        return None;
    }
    let llm_vars: BTreeSet<&String> = llm.variables.iter().collect();
    Some(gt_vars.intersection(&llm_vars).count() as f64 / gt_vars.len() as f64)
}

/// Level agreement aggregates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelReport {
    pub l_acc: f64,
    pub aod: f64,
    pub n_pairs: usize,
}

/// Mean text-similarity scores over llm-present pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TextReport {
    pub bleu_1: f64,
    pub bleu_2: f64,
    pub bleu_4: f64,
    pub meteor: f64,
    pub rouge_1: f64,
    pub rouge_2: f64,
    pub rouge_l: f64,
    pub ntlev: f64,
}

/// All ingredient aggregates with their contributing-pair counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngredientReport {
    pub level: LevelReport,
    /// Mean variable coverage; `None` when no pair had GT variables.
    pub variable_coverage: Option<f64>,
    pub variable_pairs: usize,
    pub text: TextReport,
    pub text_pairs: usize,
}

/// Per-pair metric values as one `pair_metrics.jsonl` line. Emitted for
/// llm-present pairs only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairMetricsRecord {
    pub file_id: String,
    pub path: String,
    pub scenario: Scenario,
    pub gt_line: usize,
    pub llm_line: usize,
    pub similarity: Option<f64>,
    pub gt_level: LogLevel,
    pub llm_level: LogLevel,
    pub level_match: bool,
    pub aod_term: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub variable_coverage: Option<f64>,
    pub bleu_1: f64,
    pub bleu_2: f64,
    pub bleu_4: f64,
    pub meteor: f64,
    pub rouge_1: f64,
    pub rouge_2: f64,
    pub rouge_l: f64,
    pub ntlev: f64,
}

/// Compute one pair's metric record. `None` when the pair has no LLM side.
pub fn pair_metrics(pair: &LogPair) -> Option<PairMetricsRecord> {
    let llm = pair.llm.as_ref()?;
    let candidate = tokenize(&llm.template);
    let reference = tokenize(&pair.gt.template);
    Some(PairMetricsRecord {
        file_id: pair.gt.file_id.clone(),
        path: pair.gt.path.as_string(),
        scenario: pair.scenario,
        gt_line: pair.gt.line,
        llm_line: llm.line,
        similarity: pair.similarity,
        gt_level: pair.gt.level,
        llm_level: llm.level,
        level_match: pair.gt.level == llm.level,
        aod_term: aod_term(pair.gt.level, llm.level),
        variable_coverage: variable_coverage(pair),
        bleu_1: bleu(&candidate, &reference, 1),
        bleu_2: bleu(&candidate, &reference, 2),
        bleu_4: bleu(&candidate, &reference, 4),
        meteor: meteor(&candidate, &reference),
        rouge_1: rouge(&candidate, &reference, RougeVariant::One),
        rouge_2: rouge(&candidate, &reference, RougeVariant::Two),
        rouge_l: rouge(&candidate, &reference, RougeVariant::L),
        ntlev: ntlev(&candidate, &reference),
    })
}

/// Aggregate level, variable, and text metrics over llm-present pairs.
pub fn ingredient_report(pairs: &[LogPair]) -> Result<IngredientReport, MetricsError> {
    let records: Vec<PairMetricsRecord> = pairs.iter().filter_map(pair_metrics).collect();
    if records.is_empty() {
        return Err(MetricsError::NoPairs);
    }
    let n = records.len() as f64;
    let mean = |select: fn(&PairMetricsRecord) -> f64| {
        records.iter().map(select).sum::<f64>() / n
    };
    let var_values: Vec<f64> = records.iter().filter_map(|r| r.variable_coverage).collect();
    Ok(IngredientReport {
        level: LevelReport {
            l_acc: records.iter().filter(|r| r.level_match).count() as f64 / n,
            aod: mean(|r| r.aod_term),
            n_pairs: records.len(),
        },
        variable_coverage: (!var_values.is_empty())
            .then(|| var_values.iter().sum::<f64>() / var_values.len() as f64),
        variable_pairs: var_values.len(),
        text: TextReport {
            bleu_1: mean(|r| r.bleu_1),
            bleu_2: mean(|r| r.bleu_2),
            bleu_4: mean(|r| r.bleu_4),
            meteor: mean(|r| r.meteor),
            rouge_1: mean(|r| r.rouge_1),
            rouge_2: mean(|r| r.rouge_2),
            rouge_l: mean(|r| r.rouge_l),
            ntlev: mean(|r| r.ntlev),
        },
        text_pairs: records.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{CodePath, LogStatement, Origin};

    fn bucket(path: &str, gt: usize, llm: usize) -> BucketCounts {
        BucketCounts {
            file_id: "acme__demo/m.py".into(),
            path: path.into(),
            gt_count: gt,
            llm_count: llm,
        }
    }

    #[test]
    fn placement_hand_example() {
        let table = vec![
            bucket("global/p1", 1, 1),
            bucket("global/p2", 2, 0),
            bucket("global/p3", 0, 3),
            bucket("global/p4", 1, 2),
        ];
        let report = placement_metrics(&table).unwrap();
        assert!((report.coverage.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((report.quantified_coverage_raw.unwrap() - 1.0).abs() < 1e-12);
        assert!((report.quantified_coverage_capped.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((report.overlogging_rate - 0.25).abs() < 1e-12);
        assert!((report.underlogging_rate - 0.25).abs() < 1e-12);
        assert!((report.agree_rate - 0.5).abs() < 1e-12);
        assert!((report.llm_to_gt_log_ratio.unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(report.path_counts.gt_paths, 3);
        let rate_sum = report.overlogging_rate + report.underlogging_rate + report.agree_rate;
        assert!((rate_sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn placement_identical_tables() {
        let table = vec![bucket("global/a", 2, 2), bucket("global/b", 1, 1)];
        let report = placement_metrics(&table).unwrap();
        assert_eq!(report.coverage, Some(1.0));
        assert_eq!(report.quantified_coverage_raw, Some(1.0));
        assert_eq!(report.overlogging_rate, 0.0);
        assert_eq!(report.underlogging_rate, 0.0);
    }

    #[test]
    fn placement_quantified_coverage_single_path() {
        let report = placement_metrics(&[bucket("global/f", 3, 2)]).unwrap();
        assert!((report.quantified_coverage_raw.unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn placement_empty_table_is_an_error() {
        assert!(matches!(placement_metrics(&[]), Err(MetricsError::EmptyCorpus)));
    }

    fn pair(gt_level: LogLevel, llm_level: Option<LogLevel>) -> LogPair {
        let mk = |origin, level, raw: &str| LogStatement {
            origin,
            repo_id: "acme__demo".into(),
            file_id: "acme__demo/m.py".into(),
            path: CodePath::global(),
            line: 1,
            level,
            raw: raw.into(),
            template: "loading model".into(),
            variables: vec!["x".into()],
        };
        LogPair {
            gt: mk(Origin::Gt, gt_level, "logger.info(\"loading model\")"),
            llm: llm_level.map(|l| mk(Origin::Llm, l, "logger.info(\"loading model\")")),
            similarity: llm_level.map(|_| 1.0),
            scenario: Scenario::OneOne,
        }
    }

    #[test]
    fn level_accuracy_counts_exact_matches() {
        let pairs = vec![
            pair(LogLevel::Info, Some(LogLevel::Info)),
            pair(LogLevel::Warning, Some(LogLevel::Error)),
            pair(LogLevel::Debug, None),
        ];
        assert!((level_accuracy(&pairs).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(level_accuracy(&[pair(LogLevel::Info, None)]), Err(MetricsError::NoPairs)));
    }

    #[test]
    fn aod_matches_pinned_terms() {
        assert_eq!(aod_term(LogLevel::Error, LogLevel::Debug), 0.0);
        assert!((aod_term(LogLevel::Info, LogLevel::Debug) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(aod_term(LogLevel::Critical, LogLevel::Critical), 1.0);
        let pairs = vec![pair(LogLevel::Info, Some(LogLevel::Info))];
        assert_eq!(aod(&pairs).unwrap(), 1.0);
    }

    #[test]
    fn aod_never_below_level_accuracy() {
        let levels = LogLevel::ALL;
        let mut pairs = Vec::new();
        for a in levels {
            for s in levels {
                pairs.push(pair(a, Some(s)));
            }
        }
        let acc = level_accuracy(&pairs).unwrap();
        let aod_value = aod(&pairs).unwrap();
        assert!(aod_value >= acc);
    }

    #[test]
    fn variable_coverage_set_semantics() {
        let mut p = pair(LogLevel::Info, Some(LogLevel::Info));
        p.gt.variables = vec!["var1".into(), "var2".into(), "var3".into()];
        p.llm.as_mut().unwrap().variables = vec!["var1".into(), "var3".into()];
        assert!((variable_coverage(&p).unwrap() - 2.0 / 3.0).abs() < 1e-12);

        p.gt.variables.clear();
        assert!(variable_coverage(&p).is_none());

        p.gt.variables = vec!["x".into()];
        p.llm.as_mut().unwrap().variables.clear();
        assert_eq!(variable_coverage(&p), Some(0.0));
    }

    #[test]
    fn ingredient_report_on_identical_pair() {
        let pairs = vec![pair(LogLevel::Info, Some(LogLevel::Info))];
        let report = ingredient_report(&pairs).unwrap();
        assert_eq!(report.level.l_acc, 1.0);
        assert_eq!(report.level.aod, 1.0);
        assert_eq!(report.variable_coverage, Some(1.0));
        assert!((report.text.bleu_4 - 1.0).abs() < 1e-12);
        assert!((report.text.rouge_l - 1.0).abs() < 1e-12);
        assert_eq!(report.text.ntlev, 0.0);
        assert_eq!(report.text_pairs, 1);
        assert!(matches!(
            ingredient_report(&[pair(LogLevel::Info, None)]),
            Err(MetricsError::NoPairs)
        ));
    }

    #[test]
    fn pair_metrics_uses_templates_not_raw() {
        let mut p = pair(LogLevel::Info, Some(LogLevel::Warning));
        p.llm.as_mut().unwrap().template = "loading data".into();
        let record = pair_metrics(&p).unwrap();
        assert!(!record.level_match);
        assert!((record.aod_term - (1.0 - 1.0 / 3.0)).abs() < 1e-12);
        // candidate "loading data" vs reference "loading model": p1 = 1/2.
        assert!((record.bleu_1 - 0.5).abs() < 1e-12);
        assert!(pair_metrics(&pair(LogLevel::Info, None)).is_none());
    }
}
