//! Pair ground-truth and generated logs bucket by bucket and print what each
//! mapping shape does: 1:1, 1:n (strongest candidate wins, rest excluded),
//! n:1 (one candidate shared), and paths only one side logged.

use logstudy::pairing::{index_by_path, pair_logs, PairingOutcome};
use logstudy::source::{extract_logs, ExtractionConfig, Origin, SourceFile};

const GT: &str = r#"import logging


def sync(items):
    logging.info("sync started")
    for item in items:
        if item.stale:
            logging.warning("stale item %s", item.id)
    logging.info("sync finished with %d items", len(items))


def cleanup(path):
    logging.debug("removing %s", path)
"#;

const LLM: &str = r#"import logging


def sync(items):
    logging.info("starting sync")
    logging.debug("item count: %d", len(items))
    for item in items:
        if item.stale:
            logging.warning("found stale item %s", item.id)
            logging.info("will refresh %s", item.id)


def cleanup(path):
    pass
"#;

fn main() {
    let cfg = ExtractionConfig::default();
    let gt_file = SourceFile::new("demo/repo", "demo__repo/sync.py", GT);
    let llm_file = SourceFile::new("demo/repo", "demo__repo/sync.py", LLM);
    let gt = extract_logs(&gt_file, Origin::Gt, &cfg).unwrap().logs;
    let llm = extract_logs(&llm_file, Origin::Llm, &cfg).unwrap().logs;

    let outcome: PairingOutcome = pair_logs(&index_by_path(gt), &index_by_path(llm));

    println!("pairs (every ground-truth log appears exactly once):");
    for pair in &outcome.pairs {
        let rhs = match &pair.llm {
            Some(l) => format!("line {} \"{}\" (sim {:.3})", l.line, l.template, pair.similarity.unwrap()),
            None => "no generated log on this path".into(),
        };
        println!(
            "  [{:?}] {} line {} \"{}\"  ->  {}",
            pair.scenario, pair.gt.path.as_string(), pair.gt.line, pair.gt.template, rhs
        );
    }

    println!("\ngenerated logs outside any pair:");
    for u in &outcome.unpaired_llm {
        let kind = if u.excluded { "excluded (lost the match)" } else { "novel path" };
        println!("  {} line {} \"{}\"  [{kind}]", u.log.path.as_string(), u.log.line, u.log.template);
    }

    println!("\nbucket table for placement metrics:");
    for b in &outcome.bucket_table {
        println!("  {:<34} gt={} llm={}", b.path, b.gt_count, b.llm_count);
    }
}
