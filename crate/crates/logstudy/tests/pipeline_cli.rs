//! Binary-level tests of the staged pipeline against the bundled fixture
//! corpus: exit codes, artifact contents, re-run short-circuiting, and the
//! config errors the CLI is contractually required to catch.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture_config() -> &'static str {
    concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus/run.toml")
}

fn run(out_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logstudy"))
        .args(["--config", fixture_config(), "--offline"])
        .arg("--out")
        .arg(out_dir)
        .args(args)
        .output()
        .unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn read_lines(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn stages_chain_and_artifacts_hold_expected_content() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();

    for stage in
        ["mine", "prepare", "generate", "extract", "pair", "evaluate", "categorize", "sample", "report"]
    {
        let result = run(out, &[stage]);
        assert!(
            result.status.success(),
            "{stage} failed: {}",
            String::from_utf8_lossy(&result.stderr)
        );
    }

    let manifest = read_json(&out.join("mine/manifest.json"));
    assert_eq!(manifest["selected_repos"].as_array().unwrap().len(), 3);
    assert_eq!(manifest["unresolved_repos"].as_array().unwrap().len(), 1);
    assert_eq!(manifest["qualifying_files"].as_array().unwrap().len(), 12);
    assert_eq!(manifest["parse_failures"].as_array().unwrap().len(), 1);
    assert_eq!(manifest["stats"]["stars"]["max"], 5393.0);

    // The nested-branch example file keeps its expected paths end to end.
    let logs = read_lines(&out.join("extract/logs.jsonl"));
    let pipeline_paths: Vec<&str> = logs
        .iter()
        .filter(|l| {
            l["origin"] == "GT"
                && l["file_id"] == "orbit-labs__gradientlab/analysis/pipeline.py"
        })
        .map(|l| l["path"].as_str().unwrap())
        .collect();
    assert_eq!(
        pipeline_paths,
        [
            "global/Analysis/__init__",
            "global/Analysis/__init__/if1",
            "global/Analysis/__init__/else1",
            "global/Analysis/__init__/if2",
        ]
    );
    assert!(logs.iter().any(|l| l["origin"] == "LLM"));

    let pairs = read_lines(&out.join("pair/pairs.jsonl"));
    assert_eq!(pairs.len(), 45);
    assert!(pairs.iter().all(|p| p["gt_line"].as_u64().is_some()));
    assert!(pairs.iter().any(|p| p["llm_line"].as_u64().is_some()));

    let metrics = read_json(&out.join("evaluate/metrics.json"));
    assert_eq!(metrics["run"]["provider"], "mock");
    assert_eq!(metrics["counts"]["gt_logs"], 45);
    assert_eq!(metrics["counts"]["llm_logs"], 22);
    assert!(metrics["placement"]["coverage"].as_f64().unwrap() > 0.0);
    assert!(metrics["ingredients"]["level"]["l_acc"].as_f64().is_some());

    let sheet = std::fs::read_to_string(out.join("sample/review_sheet.csv")).unwrap();
    assert!(sheet.starts_with("category,repo,file,path,"));
    assert!(sheet.lines().next().unwrap().ends_with("annotation"));

    let report = std::fs::read_to_string(out.join("report/report.md")).unwrap();
    assert!(report.contains("## Placement"));
    assert!(report.contains("## Review categories"));

    // Second invocation of a finished stage short-circuits.
    let again = run(out, &["pair"]);
    assert!(again.status.success());
    assert!(String::from_utf8_lossy(&again.stdout).contains("pair: up to date"));
}

#[test]
fn run_all_matches_the_staged_chain_and_honors_seed_override() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    let result = run(out, &["run-all"]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));

    let plan = read_json(&out.join("sample/sample_plan.json"));
    assert_eq!(plan["seed"], 17);

    let tmp2 = tempfile::tempdir().unwrap();
    let result = run(tmp2.path(), &["--seed", "99", "run-all"]);
    assert!(result.status.success());
    let plan = read_json(&tmp2.path().join("sample/sample_plan.json"));
    assert_eq!(plan["seed"], 99);
}

#[test]
fn out_of_order_stage_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let result = run(tmp.path(), &["prepare"]);
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("run the `mine` stage first"), "stderr: {stderr}");
}

#[test]
fn http_provider_without_key_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    assert!(run(out, &["mine"]).status.success());
    assert!(run(out, &["prepare"]).status.success());
    let result = Command::new(env!("CARGO_BIN_EXE_logstudy"))
        .args(["--config", fixture_config()])
        .arg("--out")
        .arg(out)
        .args(["--provider", "http", "generate"])
        .env("LOGSTUDY_API_BASE", "http://127.0.0.1:1/v1")
        .env_remove("LOGSTUDY_API_KEY")
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("LOGSTUDY_API_KEY"), "stderr: {stderr}");
}

#[test]
fn unknown_provider_and_missing_config_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let result = run(tmp.path(), &["--provider", "oracle", "mine"]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("provider"));

    let result = Command::new(env!("CARGO_BIN_EXE_logstudy"))
        .args(["--config", "/nonexistent/run.toml", "mine"])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
}
