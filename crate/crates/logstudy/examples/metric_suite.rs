//! Score a paired corpus: placement metrics over the bucket table, then
//! level, variable, and text-similarity ingredients over the pairs.

use logstudy::metrics::text::{bleu, meteor, ntlev, rouge, RougeVariant};
use logstudy::metrics::{ingredient_report, placement_metrics};
use logstudy::pairing::{index_by_path, pair_logs};
use logstudy::source::{extract_logs, ExtractionConfig, Origin, SourceFile};

const GT: &str = r#"import logging


def fit(model, epochs):
    logging.info("training for %d epochs", epochs)
    for epoch in range(epochs):
        if model.diverged():
            logging.error("diverged at epoch %d", epoch)
            return None
    logging.info("training complete")
    return model
"#;

const LLM: &str = r#"import logging


def fit(model, epochs):
    logging.info("starting training for %d epochs", epochs)
    for epoch in range(epochs):
        if model.diverged():
            logging.warning("model diverged at epoch %d", epoch)
            return None
    logging.debug("done")
    return model
"#;

fn main() {
    let cfg = ExtractionConfig::default();
    let gt = extract_logs(&SourceFile::new("d/r", "d__r/fit.py", GT), Origin::Gt, &cfg).unwrap();
    let llm = extract_logs(&SourceFile::new("d/r", "d__r/fit.py", LLM), Origin::Llm, &cfg).unwrap();
    let outcome = pair_logs(&index_by_path(gt.logs), &index_by_path(llm.logs));

    let placement = placement_metrics(&outcome.bucket_table).unwrap();
    println!("placement over {} paths:", placement.path_counts.total);
    println!("  coverage                {:.4}", placement.coverage.unwrap());
    println!("  quantified coverage     {:.4} (capped {:.4})",
        placement.quantified_coverage_raw.unwrap(),
        placement.quantified_coverage_capped.unwrap());
    println!("  overlogging rate        {:.4}", placement.overlogging_rate);
    println!("  underlogging rate       {:.4}", placement.underlogging_rate);
    println!("  agreement rate          {:.4}", placement.agree_rate);
    println!("  generated:gt log ratio  {:.4}", placement.llm_to_gt_log_ratio.unwrap());

    let ingredients = ingredient_report(&outcome.pairs).unwrap();
    println!("\ningredients over {} scored pairs:", ingredients.level.n_pairs);
    println!("  level accuracy          {:.4}", ingredients.level.l_acc);
    println!("  ordinal distance score  {:.4}", ingredients.level.aod);
    match ingredients.variable_coverage {
        Some(v) => println!("  variable coverage       {:.4} over {} pairs", v, ingredients.variable_pairs),
        None => println!("  variable coverage       n/a (no pair had gt variables)"),
    }
    let t = &ingredients.text;
    println!("  bleu-1/2/4              {:.4} / {:.4} / {:.4}", t.bleu_1, t.bleu_2, t.bleu_4);
    println!("  rouge-1/2/l             {:.4} / {:.4} / {:.4}", t.rouge_1, t.rouge_2, t.rouge_l);
    println!("  meteor                  {:.4}", t.meteor);
    println!("  normalized token lev    {:.4}", t.ntlev);

    // The text metrics are also callable directly on token sequences.
    let cand: Vec<String> = "starting training for epochs".split(' ').map(String::from).collect();
    let refr: Vec<String> = "training for epochs".split(' ').map(String::from).collect();
    println!("\ndirect call on one candidate/reference pair:");
    println!("  bleu-2  {:.4}", bleu(&cand, &refr, 2));
    println!("  rouge-l {:.4}", rouge(&cand, &refr, RougeVariant::L));
    println!("  meteor  {:.4}", meteor(&cand, &refr));
    println!("  ntlev   {:.4}", ntlev(&cand, &refr));
}
