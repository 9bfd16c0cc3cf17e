//! Extract log statements from a Python snippet and print the AST code path
//! each one sits on. Paths name the enclosing scopes plus occurrence-numbered
//! branch labels, so "where a log lives" survives line renumbering.

use logstudy::source::{extract_logs, ExtractionConfig, Origin, SourceFile};

const SNIPPET: &str = r#"import logging

logging.info("Analysis started")

class Analysis:
    def __init__(self, data):
        logging.info("Data imported")
        if not data:
            logging.warning("Data is empty")
        else:
            logging.info("Data is loaded")
        if self.validate(data):
            for row in data:
                if row.bad:
                    logging.error("bad row %s", row)
"#;

fn main() {
    let file = SourceFile::new("demo/repo", "demo__repo/analysis.py", SNIPPET);
    let extraction =
        extract_logs(&file, Origin::Gt, &ExtractionConfig::default()).expect("snippet parses");

    println!("{:<42} {:>4}  {:<8} statement", "code path", "line", "level");
    for log in &extraction.logs {
        println!(
            "{:<42} {:>4}  {:<8} {}",
            log.path.as_string(),
            log.line,
            format!("{:?}", log.level).to_lowercase(),
            log.raw
        );
    }
    println!("\nvariables of the last log: {:?}", extraction.logs.last().unwrap().variables);
}
