//! Sentence-level text similarity metrics over token sequences.
//!
//! Directionality is fixed corpus-wide: the LLM template is the candidate,
//! the GT template the reference. BLEU and ROUGE follow that orientation;
//! NTLev is symmetric.

use std::collections::HashMap;

use rust_stemmers::{Algorithm, Stemmer};

/// Smoothing floor for zero n-gram counts in BLEU.
const BLEU_EPSILON: f64 = 1e-9;

/// Smoothed sentence BLEU-n with brevity penalty.
///
/// Geometric mean of clipped modified n-gram precisions for orders
/// `1..=n`, each zero count replaced by an epsilon, multiplied by
/// `exp(1 - r/c)` when the candidate is shorter than the reference.
/// The effective maximum order is capped at both token lengths so that
/// identical short texts still score 1. Either side empty scores 0.
pub fn bleu(candidate: &[String], reference: &[String], n: usize) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let max_order = n.min(candidate.len()).min(reference.len());
    let mut log_sum = 0.0;
    for order in 1..=max_order {
        let cand_grams = ngram_counts(candidate, order);
        let ref_grams = ngram_counts(reference, order);
        let total: usize = cand_grams.values().sum();
        let matched: usize = cand_grams
            .iter()
            .map(|(gram, count)| (*count).min(ref_grams.get(gram).copied().unwrap_or(0)))
            .sum();
        let precision = if matched == 0 {
            BLEU_EPSILON
        } else {
            matched as f64 / total as f64
        };
        log_sum += precision.ln();
    }
    let geo_mean = (log_sum / max_order as f64).exp();
    let (c, r) = (candidate.len() as f64, reference.len() as f64);
    let brevity = if c < r { (1.0 - r / c).exp() } else { 1.0 };
    geo_mean * brevity
}

/// ROUGE variant selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RougeVariant {
    One,
    Two,
    L,
}

/// ROUGE F1. Variants 1 and 2 use clipped n-gram overlap; variant L uses
/// the longest common subsequence. Either side empty scores 0.
pub fn rouge(candidate: &[String], reference: &[String], variant: RougeVariant) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let (matched, cand_total, ref_total) = match variant {
        RougeVariant::One | RougeVariant::Two => {
            let order = if variant == RougeVariant::One { 1 } else { 2 };
            let cand_grams = ngram_counts(candidate, order);
            let ref_grams = ngram_counts(reference, order);
            let matched: usize = cand_grams
                .iter()
                .map(|(gram, count)| (*count).min(ref_grams.get(gram).copied().unwrap_or(0)))
                .sum();
            (
                matched,
                cand_grams.values().sum::<usize>(),
                ref_grams.values().sum::<usize>(),
            )
        }
        RougeVariant::L => (lcs_length(candidate, reference), candidate.len(), reference.len()),
    };
    if matched == 0 || cand_total == 0 || ref_total == 0 {
        return 0.0;
    }
    let precision = matched as f64 / cand_total as f64;
    let recall = matched as f64 / ref_total as f64;
    2.0 * precision * recall / (precision + recall)
}

/// METEOR with exact and stemmed matching stages.
///
/// Unigram matches are found greedily left to right, exact matches first,
/// then Snowball-English-stem matches over the leftovers. The score is
/// `Fmean * (1 - penalty)` with `Fmean = 10PR / (R + 9P)` and
/// `penalty = 0.5 * (chunks/matches)^3`. No matches scores 0.
pub fn meteor(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let mut cand_matched: Vec<Option<usize>> = vec![None; candidate.len()];
    let mut ref_taken = vec![false; reference.len()];
    let match_stage = |key: &dyn Fn(&str) -> String,
                           cand_matched: &mut Vec<Option<usize>>,
                           ref_taken: &mut Vec<bool>| {
        for (i, token) in candidate.iter().enumerate() {
            if cand_matched[i].is_some() {
                continue;
            }
            let wanted = key(token);
            for (j, other) in reference.iter().enumerate() {
                if !ref_taken[j] && key(other) == wanted {
                    cand_matched[i] = Some(j);
                    ref_taken[j] = true;
                    break;
                }
            }
        }
    };
    match_stage(&|t: &str| t.to_string(), &mut cand_matched, &mut ref_taken);
    match_stage(&|t: &str| stem(t), &mut cand_matched, &mut ref_taken);

    let pairs: Vec<(usize, usize)> = cand_matched
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (i, j)))
        .collect();
    let matches = pairs.len();
    if matches == 0 {
        return 0.0;
    }
    let precision = matches as f64 / candidate.len() as f64;
    let recall = matches as f64 / reference.len() as f64;
    let fmean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let mut chunks = 1;
    for window in pairs.windows(2) {
        let (i0, j0) = window[0];
        let (i1, j1) = window[1];
        if i1 != i0 + 1 || j1 != j0 + 1 {
            chunks += 1;
        }
    }
    let penalty = 0.5 * (chunks as f64 / matches as f64).powi(3);
    fmean * (1.0 - penalty)
}

/// Normalized token-level Levenshtein distance: unit-cost edit distance
/// divided by the longer token length. Both sides empty scores 0.
pub fn ntlev(candidate: &[String], reference: &[String]) -> f64 {
    let longest = candidate.len().max(reference.len());
    if longest == 0 {
        return 0.0;
    }
    edit_distance(candidate, reference) as f64 / longest as f64
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

fn lcs_length(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            curr[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

fn edit_distance(a: &[String], b: &[String]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

thread_local! {
    static STEMMER: Stemmer = Stemmer::create(Algorithm::English);
}

fn stem(token: &str) -> String {
    STEMMER.with(|s| s.stem(token).into_owned())
}
