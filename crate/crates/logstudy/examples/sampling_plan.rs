//! Plan a manual-review sample: proportion-estimation sample size capped at
//! the population, proportional allocation across the four disagreement
//! categories, and a seeded stratified draw.

use logstudy::pairing::{index_by_path, pair_logs};
use logstudy::source::{extract_logs, ExtractionConfig, Origin, SourceFile};
use logstudy::study::{categorize, plan_sample, sample_size, stratified_sample, Category};

const GT: &str = r#"import logging


def serve(requests):
    logging.info("serving %d requests", len(requests))
    for req in requests:
        if req.invalid:
            logging.warning("bad request %s", req.id)
    logging.info("done")
"#;

const LLM: &str = r#"import logging


def serve(requests):
    logging.debug("got requests")
    for req in requests:
        if req.invalid:
            logging.error("invalid request: %s", req.id)
        logging.info("handling request %s", req.id)
"#;

fn main() {
    println!("sample sizes at 95% confidence, 5% margin:");
    for population in [100usize, 2_000, 114_522] {
        println!("  population {:>7} -> n = {}", population, sample_size(population, 0.95, 0.05));
    }

    let cfg = ExtractionConfig::default();
    let gt = extract_logs(&SourceFile::new("d/r", "d__r/serve.py", GT), Origin::Gt, &cfg).unwrap();
    let llm = extract_logs(&SourceFile::new("d/r", "d__r/serve.py", LLM), Origin::Llm, &cfg).unwrap();
    let outcome = pair_logs(&index_by_path(gt.logs), &index_by_path(llm.logs));

    let records = categorize(&outcome);
    println!("\ndisagreement records by category:");
    for category in Category::ALL {
        let count = records.iter().filter(|r| r.category == category).count();
        println!("  {:<20} {}", category.name(), count);
    }

    let plan = plan_sample(&records, 0.95, 0.05, 17);
    println!(
        "\nplan: population {} -> n {} (seed {}), allocation {:?}",
        plan.population,
        plan.total_n,
        plan.seed,
        plan.allocation.iter().map(|(c, n)| (c.name(), *n)).collect::<Vec<_>>()
    );

    let sample = stratified_sample(&records, &plan);
    println!("\ndrawn records:");
    for record in &sample {
        println!(
            "  {:<20} {} line {:?}",
            record.category.name(),
            record.path,
            record.gt_line.or(record.llm_line)
        );
    }
}
