//! Disagreement categorization, stratified sampling, and review sheets.
//!
//! Every log-level disagreement between GT and LLM falls into one of four
//! challenge categories. A proportional stratified sample sized for a
//! confidence level and error margin is drawn for human review and written
//! as a CSV sheet with context snippets and an empty annotation column.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::io::Write;

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::pairing::PairingOutcome;
use crate::source::{LogLevel, Origin};

/// The four challenge categories of GT/LLM disagreement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Overlogging,
    Underlogging,
    DifferentLevel,
    DifferentVariables,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Overlogging,
        Category::Underlogging,
        Category::DifferentLevel,
        Category::DifferentVariables,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Overlogging => "Overlogging",
            Category::Underlogging => "Underlogging",
            Category::DifferentLevel => "DifferentLevel",
            Category::DifferentVariables => "DifferentVariables",
        }
    }
}

/// One categorized disagreement. Overlogging records carry only the LLM
/// side, Underlogging only the GT side; the two Different* categories carry
/// both. Context snippets are resolved from source files when the review
/// sheet is written.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategorizedRecord {
    pub category: Category,
    pub repo_id: String,
    pub file_id: String,
    pub path: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gt_line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub llm_line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gt_level: Option<LogLevel>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub llm_level: Option<LogLevel>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gt_text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub llm_text: Option<String>,
    pub gt_vars: Vec<String>,
    pub llm_vars: Vec<String>,
    /// True when the same pair also produced a record in the other
    /// Different* category.
    pub multi_flag: bool,
}

/// Classify a pairing outcome into challenge categories.
///
/// LLM logs on GT-empty paths are Overlogging; GT logs the LLM missed are
/// Underlogging; level mismatches are DifferentLevel; pairs where both
/// sides have variables but the sets differ are DifferentVariables. A pair
/// can produce both Different* records, flagged on each. Excluded matching
/// losers are not Overlogging and produce no record.
pub fn categorize(outcome: &PairingOutcome) -> Vec<CategorizedRecord> {
    let mut records = Vec::new();
    for unpaired in &outcome.unpaired_llm {
        if unpaired.excluded {
            continue;
        }
        let log = &unpaired.log;
        records.push(CategorizedRecord {
            category: Category::Overlogging,
            repo_id: log.repo_id.clone(),
            file_id: log.file_id.clone(),
            path: log.path.as_string(),
            gt_line: None,
            llm_line: Some(log.line),
            gt_level: None,
            llm_level: Some(log.level),
            gt_text: None,
            llm_text: Some(log.raw.clone()),
            gt_vars: Vec::new(),
            llm_vars: log.variables.clone(),
            multi_flag: false,
        });
    }
    for pair in &outcome.pairs {
        let gt = &pair.gt;
        let Some(llm) = &pair.llm else {
            records.push(CategorizedRecord {
                category: Category::Underlogging,
                repo_id: gt.repo_id.clone(),
                file_id: gt.file_id.clone(),
                path: gt.path.as_string(),
                gt_line: Some(gt.line),
                llm_line: None,
                gt_level: Some(gt.level),
                llm_level: None,
                gt_text: Some(gt.raw.clone()),
                llm_text: None,
                gt_vars: gt.variables.clone(),
                llm_vars: Vec::new(),
                multi_flag: false,
            });
            continue;
        };
        let level_differs = gt.level != llm.level;
        let gt_vars: BTreeSet<&String> = gt.variables.iter().collect();
        let llm_vars: BTreeSet<&String> = llm.variables.iter().collect();
        let vars_differ = !gt_vars.is_empty() && !llm_vars.is_empty() && gt_vars != llm_vars;
        let multi = level_differs && vars_differ;
        let both_sides = |category| CategorizedRecord {
            category,
            repo_id: gt.repo_id.clone(),
            file_id: gt.file_id.clone(),
            path: gt.path.as_string(),
            gt_line: Some(gt.line),
            llm_line: Some(llm.line),
            gt_level: Some(gt.level),
            llm_level: Some(llm.level),
            gt_text: Some(gt.raw.clone()),
            llm_text: Some(llm.raw.clone()),
            gt_vars: gt.variables.clone(),
            llm_vars: llm.variables.clone(),
            multi_flag: multi,
        };
        if level_differs {
            records.push(both_sides(Category::DifferentLevel));
        }
        if vars_differ {
            records.push(both_sides(Category::DifferentVariables));
        }
    }
    records.sort_by(|a, b| {
        (a.category, &a.file_id, &a.path, a.gt_line, a.llm_line).cmp(&(
            b.category,
            &b.file_id,
            &b.path,
            b.gt_line,
            b.llm_line,
        ))
    });
    records
}

/// Sample size for estimating a proportion: `z²·0.25/margin²` with `z` the
/// two-sided normal quantile, rounded, capped at the population. No finite
/// population correction.
pub fn sample_size(population: usize, confidence: f64, margin: f64) -> usize {
    let normal = Normal::standard();
    let z = normal.inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let n0 = z * z * 0.25 / (margin * margin);
    population.min(n0.round() as usize)
}

/// A reproducible sampling plan over categorized records.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplePlan {
    pub confidence: f64,
    pub margin: f64,
    pub population: usize,
    pub total_n: usize,
    pub allocation: BTreeMap<Category, usize>,
    pub seed: u64,
}

/// Build a plan with proportional largest-remainder allocation across the
/// category strata. Quota ties go to the earlier category.
pub fn plan_sample(
    records: &[CategorizedRecord],
    confidence: f64,
    margin: f64,
    seed: u64,
) -> SamplePlan {
    let mut counts: BTreeMap<Category, usize> = BTreeMap::new();
    for category in Category::ALL {
        counts.insert(category, 0);
    }
    for record in records {
        *counts.get_mut(&record.category).expect("all categories present") += 1;
    }
    let population = records.len();
    let total_n = sample_size(population, confidence, margin);
    let mut allocation: BTreeMap<Category, usize> = BTreeMap::new();
    let mut remainders: Vec<(f64, Category)> = Vec::new();
    let mut allocated = 0usize;
    for category in Category::ALL {
        let count = counts[&category];
        let quota = if population == 0 {
            0.0
        } else {
            total_n as f64 * count as f64 / population as f64
        };
        let floor = quota.floor() as usize;
        allocation.insert(category, floor);
        allocated += floor;
        remainders.push((quota - floor as f64, category));
    }
    remainders.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    for (_, category) in remainders.into_iter().take(total_n.saturating_sub(allocated)) {
        *allocation.get_mut(&category).expect("present") += 1;
    }
    SamplePlan { confidence, margin, population, total_n, allocation, seed }
}

/// Draw the stratified sample. Within each category records are sampled
/// uniformly without replacement with a stream seeded from `plan.seed` and
/// the category index, and returned in their original order.
pub fn stratified_sample(
    records: &[CategorizedRecord],
    plan: &SamplePlan,
) -> Vec<CategorizedRecord> {
    let mut sample = Vec::new();
    for (category_index, category) in Category::ALL.into_iter().enumerate() {
        let members: Vec<&CategorizedRecord> =
            records.iter().filter(|r| r.category == category).collect();
        let take = plan.allocation.get(&category).copied().unwrap_or(0).min(members.len());
        if take == 0 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed.wrapping_add(category_index as u64));
        let mut indices: Vec<usize> = (0..members.len()).collect();
        for i in 0..take {
            let j = rng.random_range(i..indices.len());
            indices.swap(i, j);
        }
        let mut chosen: Vec<usize> = indices[..take].to_vec();
        chosen.sort_unstable();
        sample.extend(chosen.into_iter().map(|i| members[i].clone()));
    }
    sample
}

/// Resolves file contents for context snippets.
pub trait SourceLookup {
    /// Content of `file_id` on the given side: GT reads the original file,
    /// LLM the generated one.
    fn content(&self, file_id: &str, origin: Origin) -> Option<String>;
}

impl<F> SourceLookup for F
where
    F: Fn(&str, Origin) -> Option<String>,
{
    fn content(&self, file_id: &str, origin: Origin) -> Option<String> {
        self(file_id, origin)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error("missing source for {file_id} ({side:?} side)")]
    MissingSource { file_id: String, side: Origin },
    #[error("review sheet io: {0}")]
    Io(#[from] std::io::Error),
    #[error("review sheet csv: {0}")]
    Csv(#[from] csv::Error),
}

/// The ±5-line window around a 1-based line, clamped at file edges.
pub fn context_snippet(content: &str, line: usize) -> String {
    let lines: Vec<&str> = content.lines().collect();
    if lines.is_empty() {
        return String::new();
    }
    let center = line.clamp(1, lines.len());
    let start = center.saturating_sub(5).max(1);
    let end = (center + 5).min(lines.len());
    lines[start - 1..end].join("\n")
}

/// Review sheet column order.
pub const REVIEW_SHEET_COLUMNS: [&str; 13] = [
    "category", "repo", "file", "path", "gt_level", "llm_level", "gt_text", "llm_text",
    "gt_vars", "llm_vars", "gt_context", "llm_context", "annotation",
];

/// Write the review CSV for a sample. Context columns are filled from the
/// lookup; the annotation column is left empty for human coders.
pub fn emit_review_sheet<W: Write>(
    sample: &[CategorizedRecord],
    lookup: &dyn SourceLookup,
    writer: W,
) -> Result<(), StudyError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(REVIEW_SHEET_COLUMNS)?;
    for record in sample {
        let side_context = |line: Option<usize>, side: Origin| -> Result<String, StudyError> {
            let Some(line) = line else {
                return Ok(String::new());
            };
            let content = lookup
                .content(&record.file_id, side)
                .ok_or_else(|| StudyError::MissingSource {
                    file_id: record.file_id.clone(),
                    side,
                })?;
            Ok(context_snippet(&content, line))
        };
        let gt_context = side_context(record.gt_line, Origin::Gt)?;
        let llm_context = side_context(record.llm_line, Origin::Llm)?;
        out.write_record([
            record.category.name(),
            record.repo_id.as_str(),
            record.file_id.as_str(),
            record.path.as_str(),
            record.gt_level.map(|l| l.name()).unwrap_or(""),
            record.llm_level.map(|l| l.name()).unwrap_or(""),
            record.gt_text.as_deref().unwrap_or(""),
            record.llm_text.as_deref().unwrap_or(""),
            &record.gt_vars.join("; "),
            &record.llm_vars.join("; "),
            &gt_context,
            &llm_context,
            "",
        ])?;
    }
    out.flush()?;
    Ok(())
}
