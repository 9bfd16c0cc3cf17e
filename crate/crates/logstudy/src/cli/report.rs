//! Render report.md from the metrics document and categorized records.
//! Pure text generation: same inputs, same bytes.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::stages::MetricsDocument;
use crate::study::{Category, CategorizedRecord};

fn cell(value: f64) -> String {
    format!("{value:.4}")
}

fn opt_cell(value: Option<f64>) -> String {
    value.map(cell).unwrap_or_else(|| "n/a".into())
}

/// Build the human-readable run report: placement table, ingredient
/// table, and review-category table.
pub fn render_report(metrics: &MetricsDocument, categorized: &[CategorizedRecord]) -> String {
    let mut out = String::new();
    let push_row = |out: &mut String, name: &str, value: String| {
        let _ = writeln!(out, "| {name} | {value} |");
    };

    let _ = writeln!(out, "# Log generation evaluation");
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Provider `{}`, model `{}`, seed {}.",
        metrics.run.provider, metrics.run.model, metrics.run.seed
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{} ground-truth logs and {} generated logs across {} code-path buckets.",
        metrics.counts.get("gt_logs").copied().unwrap_or(0),
        metrics.counts.get("llm_logs").copied().unwrap_or(0),
        metrics.counts.get("buckets").copied().unwrap_or(0),
    );
    let _ = writeln!(out);

    let _ = writeln!(out, "## Placement");
    let _ = writeln!(out);
    let _ = writeln!(out, "| Metric | Value |");
    let _ = writeln!(out, "|---|---|");
    let p = &metrics.placement;
    push_row(&mut out, "Coverage", opt_cell(p.coverage));
    push_row(&mut out, "Quantified coverage (raw)", opt_cell(p.quantified_coverage_raw));
    push_row(&mut out, "Quantified coverage (capped)", opt_cell(p.quantified_coverage_capped));
    push_row(&mut out, "Overlogging rate", cell(p.overlogging_rate));
    push_row(&mut out, "Underlogging rate", cell(p.underlogging_rate));
    push_row(&mut out, "Agreement rate", cell(p.agree_rate));
    push_row(&mut out, "Generated:ground-truth log ratio", opt_cell(p.llm_to_gt_log_ratio));
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Paths: {} total, {} with ground-truth logs, {} agreeing, {} overlogged, {} underlogged.",
        p.path_counts.total,
        p.path_counts.gt_paths,
        p.path_counts.agreeing,
        p.path_counts.overlogged,
        p.path_counts.underlogged,
    );
    let _ = writeln!(out);

    let _ = writeln!(out, "## Ingredients");
    let _ = writeln!(out);
    match &metrics.ingredients {
        None => {
            let _ = writeln!(out, "No paired logs to score.");
        }
        Some(ing) => {
            let _ = writeln!(out, "| Metric | Value | Pairs |");
            let _ = writeln!(out, "|---|---|---|");
            let _ = writeln!(out, "| Level accuracy | {} | {} |", cell(ing.level.l_acc), ing.level.n_pairs);
            let _ = writeln!(out, "| Average ordinal distance score | {} | {} |", cell(ing.level.aod), ing.level.n_pairs);
            let _ = writeln!(
                out,
                "| Variable coverage | {} | {} |",
                opt_cell(ing.variable_coverage),
                ing.variable_pairs
            );
            for (name, value) in [
                ("BLEU-1", ing.text.bleu_1),
                ("BLEU-2", ing.text.bleu_2),
                ("BLEU-4", ing.text.bleu_4),
                ("ROUGE-1", ing.text.rouge_1),
                ("ROUGE-2", ing.text.rouge_2),
                ("ROUGE-L", ing.text.rouge_l),
                ("METEOR", ing.text.meteor),
                ("NTLev", ing.text.ntlev),
            ] {
                let _ = writeln!(out, "| {name} | {} | {} |", cell(value), ing.text_pairs);
            }
        }
    }
    let _ = writeln!(out);

    let _ = writeln!(out, "## Review categories");
    let _ = writeln!(out);
    let mut counts: BTreeMap<Category, usize> = BTreeMap::new();
    for record in categorized {
        *counts.entry(record.category).or_insert(0) += 1;
    }
    let _ = writeln!(out, "| Category | Records |");
    let _ = writeln!(out, "|---|---|");
    for category in Category::ALL {
        let _ = writeln!(out, "| {} | {} |", category.name(), counts.get(&category).copied().unwrap_or(0));
    }
    out
}
