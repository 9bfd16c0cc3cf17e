//! Strip logging calls, comments, and docstrings from a file the way the
//! prepare stage does before prompting, and show the file stays parseable.

use logstudy::source::{extract_logs, parses, strip_file, ExtractionConfig, Origin, SourceFile};

const ORIGINAL: &str = r#""""Job runner."""
import logging

logger = logging.getLogger(__name__)


def run(jobs):
    """Run every job, logging failures."""
    done = 0
    for job in jobs:
        # skip jobs another worker claimed
        if job.claimed:
            logger.debug("skipping %s", job.id)
            continue
        try:
            job.execute()
            done += 1
        except RuntimeError:
            logger.error("job %s failed", job.id)
    logger.info("finished %d jobs", done)
    return done
"#;

fn main() {
    let cfg = ExtractionConfig::default();
    let file = SourceFile::new("demo/repo", "demo__repo/runner.py", ORIGINAL);
    let stripped = strip_file(&file, &cfg).expect("file parses");

    println!("--- original ---\n{ORIGINAL}");
    println!("--- stripped ---\n{}", stripped.content);
    println!(
        "removed {} logs and {} comment/docstring lines",
        stripped.removed_logs, stripped.removed_comment_lines
    );

    assert!(parses(&stripped.content));
    let refile = SourceFile::new("demo/repo", "demo__repo/runner.py", stripped.content.clone());
    let residue = extract_logs(&refile, Origin::Gt, &cfg).unwrap();
    println!("still parses: yes; extractable logs left: {}", residue.logs.len());
}
