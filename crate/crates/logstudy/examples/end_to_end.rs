//! Run the whole staged pipeline, mine through report, against the fixture
//! corpus bundled with the crate, then print the rendered report. Uses the
//! offline mock provider; everything lands in a temp directory.

use std::path::PathBuf;

use logstudy::cli::{run, Cli, Command};

fn main() {
    let manifest_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let out = std::env::temp_dir().join(format!("logstudy-end-to-end-{}", std::process::id()));

    let cli = Cli {
        config: Some(manifest_dir.join("fixtures/corpus/run.toml")),
        out: Some(out.clone()),
        provider: None,
        model: None,
        seed: None,
        jobs: None,
        offline: true,
        command: Command::RunAll,
    };

    match run(&cli) {
        Ok(false) => {}
        Ok(true) => println!("(some files failed; see the stage summaries)"),
        Err(e) => {
            eprintln!("pipeline failed: {e}");
            std::process::exit(1);
        }
    }

    let report = std::fs::read_to_string(out.join("report/report.md")).unwrap();
    println!("\n{report}");
    println!("artifacts left in {}", out.display());
}
