//! Acceptance gate: one test per criterion, each ending with a PASS line.
//! Run with `cargo test --test acceptance -- --nocapture` to see them.

mod common;

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use logstudy::metrics::text::{bleu, ntlev, rouge, RougeVariant};
use logstudy::metrics::{aod_term, ingredient_report, placement_metrics};
use logstudy::pairing::{
    index_by_path, pair_logs, pair_logs_with, statement_similarity, BucketCounts, Scenario,
};
use logstudy::source::{
    extract_logs, parses, strip_file, CodePath, ExtractionConfig, LogLevel, LogStatement, Origin,
    SourceFile,
};
use logstudy::study::{plan_sample, sample_size, stratified_sample, CategorizedRecord, Category};

fn make_log(origin: Origin, file: &str, path: &str, line: usize, raw: &str) -> LogStatement {
    LogStatement {
        origin,
        repo_id: "acme/demo".into(),
        file_id: file.into(),
        path: CodePath::from_labels(path.split('/').map(String::from)),
        line,
        level: LogLevel::Info,
        raw: raw.into(),
        template: raw.trim_start_matches("logger.info(\"").trim_end_matches("\")").into(),
        variables: Vec::new(),
    }
}

#[test]
fn criterion_1_nested_branch_paths_are_exact() {
    let content = include_str!("fixtures/nested_branches.py");
    let started = Instant::now();
    let file = SourceFile::new("acme/demo", "acme__demo/nested_branches.py", content);
    let extraction = extract_logs(&file, Origin::Gt, &ExtractionConfig::default()).unwrap();
    let elapsed = started.elapsed();
    let paths: Vec<String> = extraction.logs.iter().map(|l| l.path.as_string()).collect();
    assert_eq!(
        paths,
        [
            "global/Analysis/__init__",
            "global/Analysis/__init__/if1",
            "global/Analysis/__init__/else1",
            "global/Analysis/__init__/if2",
        ]
    );
    assert!(elapsed.as_secs_f64() < 1.0, "extraction took {elapsed:?}");
    println!("criterion 1: PASS — four expected paths extracted in {elapsed:?}");
}

#[test]
fn criterion_2_stripping_is_sound_on_200_synthetic_files() {
    let cfg = ExtractionConfig::default();
    for seed in 0..200u64 {
        let content = common::synthetic_python(seed, 40);
        assert!(parses(&content), "generator must emit valid Python (seed {seed})");
        let file = SourceFile::new("syn/repo", format!("syn__repo/f{seed}.py"), content);
        let stripped = strip_file(&file, &cfg).unwrap();
        assert!(parses(&stripped.content), "stripped output must parse (seed {seed})");
        let refile = SourceFile::new("syn/repo", file.file_id.clone(), stripped.content.clone());
        let residue = extract_logs(&refile, Origin::Gt, &cfg).unwrap();
        assert!(
            residue.logs.is_empty() && residue.unresolved.is_empty(),
            "stripped file still has logs (seed {seed})"
        );
        let again = strip_file(&refile, &cfg).unwrap();
        assert_eq!(again.content, stripped.content, "strip must be idempotent (seed {seed})");
    }
    println!("criterion 2: PASS — 200/200 stripped files parse, are log-free, and re-strip unchanged");
}

#[test]
fn criterion_3_pairing_reproduces_goldens_and_random_invariants() {
    // Panel 1 — one GT, three candidates with similarities 0.82/0.65/0.47.
    let gt = vec![make_log(Origin::Gt, "f.py", "global/f", 1, "gt")];
    let llm = vec![
        make_log(Origin::Llm, "f.py", "global/f", 1, "llm1"),
        make_log(Origin::Llm, "f.py", "global/f", 2, "llm2"),
        make_log(Origin::Llm, "f.py", "global/f", 3, "llm3"),
    ];
    let sims: BTreeMap<usize, f64> = [(1, 0.82), (2, 0.65), (3, 0.47)].into();
    let outcome = pair_logs_with(&index_by_path(gt), &index_by_path(llm), |_, l| sims[&l.line]);
    assert_eq!(outcome.pairs.len(), 1);
    assert_eq!(outcome.pairs[0].scenario, Scenario::OneN);
    assert_eq!(outcome.pairs[0].llm.as_ref().unwrap().line, 1);
    assert_eq!(outcome.pairs[0].similarity, Some(0.82));
    assert!(outcome.unpaired_llm.iter().all(|u| u.excluded));
    assert_eq!(outcome.unpaired_llm.len(), 2);

    // Panel 2 — three GT logs all take the single candidate.
    let gt = vec![
        make_log(Origin::Gt, "f.py", "global/g", 1, "gt1"),
        make_log(Origin::Gt, "f.py", "global/g", 2, "gt2"),
        make_log(Origin::Gt, "f.py", "global/g", 3, "gt3"),
    ];
    let llm = vec![make_log(Origin::Llm, "f.py", "global/g", 9, "llm")];
    let outcome = pair_logs(&index_by_path(gt), &index_by_path(llm));
    assert_eq!(outcome.pairs.len(), 3);
    assert!(outcome.pairs.iter().all(|p| p.scenario == Scenario::NOne));
    assert!(outcome.pairs.iter().all(|p| p.llm.as_ref().unwrap().line == 9));
    assert!(outcome.unpaired_llm.is_empty());

    // Panel 3 — two GT and three candidates; the weakest is excluded.
    let gt = vec![
        make_log(Origin::Gt, "f.py", "global/h", 1, "logger.info(\"alpha beta\")"),
        make_log(Origin::Gt, "f.py", "global/h", 2, "logger.info(\"gamma delta\")"),
    ];
    let llm = vec![
        make_log(Origin::Llm, "f.py", "global/h", 5, "logger.info(\"alpha beta\")"),
        make_log(Origin::Llm, "f.py", "global/h", 6, "logger.info(\"gamma delta\")"),
        make_log(Origin::Llm, "f.py", "global/h", 7, "logger.info(\"unrelated words\")"),
    ];
    let outcome = pair_logs(&index_by_path(gt), &index_by_path(llm));
    assert_eq!(outcome.pairs.len(), 2);
    assert!(outcome.pairs.iter().all(|p| p.scenario == Scenario::NN));
    assert_eq!(outcome.pairs[0].llm.as_ref().unwrap().line, 5);
    assert_eq!(outcome.pairs[1].llm.as_ref().unwrap().line, 6);
    assert_eq!(outcome.unpaired_llm.len(), 1);
    assert_eq!(outcome.unpaired_llm[0].log.line, 7);
    assert!(outcome.unpaired_llm[0].excluded);

    // Randomized buckets: conservation, partition, argmax optimality.
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for trial in 0..1000 {
        let buckets = rng.random_range(1..=6);
        let mut gt = Vec::new();
        let mut llm = Vec::new();
        for b in 0..buckets {
            let file = format!("f{}.py", b % 2);
            let path = format!("global/p{b}");
            let gt_count = rng.random_range(0..=3);
            let llm_count = if gt_count == 0 { rng.random_range(1..=3) } else { rng.random_range(0..=3) };
            for i in 0..gt_count {
                let text = common::random_tokens(&mut rng, 5).join(" ");
                gt.push(make_log(Origin::Gt, &file, &path, i + 1, &text));
            }
            for i in 0..llm_count {
                let text = common::random_tokens(&mut rng, 5).join(" ");
                llm.push(make_log(Origin::Llm, &file, &path, 100 + i, &text));
            }
        }
        let gt_index = index_by_path(gt.clone());
        let llm_index = index_by_path(llm.clone());
        let outcome = pair_logs(&gt_index, &llm_index);

        // Every GT log pairs exactly once.
        assert_eq!(outcome.pairs.len(), gt.len(), "trial {trial}");
        let mut seen: Vec<(String, String, usize)> = outcome
            .pairs
            .iter()
            .map(|p| (p.gt.file_id.clone(), p.gt.path.as_string(), p.gt.line))
            .collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), gt.len(), "trial {trial}: duplicated GT log in pairs");

        // LLM logs partition into paired, excluded, and novel.
        let paired: Vec<usize> = outcome
            .pairs
            .iter()
            .filter_map(|p| p.llm.as_ref().map(|l| l.line))
            .collect();
        let mut accounted: Vec<(String, String, usize)> = Vec::new();
        for p in &outcome.pairs {
            if let Some(l) = &p.llm {
                accounted.push((l.file_id.clone(), l.path.as_string(), l.line));
            }
        }
        for u in &outcome.unpaired_llm {
            accounted.push((u.log.file_id.clone(), u.log.path.as_string(), u.log.line));
        }
        accounted.sort();
        accounted.dedup();
        assert_eq!(accounted.len(), llm.len(), "trial {trial}: LLM partition leak");
        assert!(!paired.is_empty() || llm.is_empty() || outcome.unpaired_llm.len() == llm.len());

        // Argmax optimality with earliest-line tie-break per pair.
        for pair in &outcome.pairs {
            let Some(chosen) = &pair.llm else { continue };
            let key = (pair.gt.file_id.clone(), pair.gt.path.as_string());
            let bucket = &llm_index[&key];
            let best = bucket
                .iter()
                .map(|l| statement_similarity(&pair.gt, l))
                .fold(f64::NEG_INFINITY, f64::max);
            let got = pair.similarity.unwrap();
            assert!((got - best).abs() < 1e-12, "trial {trial}: non-maximal choice");
            let earliest = bucket
                .iter()
                .find(|l| (statement_similarity(&pair.gt, l) - best).abs() < 1e-12)
                .unwrap();
            assert_eq!(chosen.line, earliest.line, "trial {trial}: tie-break violated");
        }
    }
    println!("criterion 3: PASS — three mapping goldens exact; invariants held on 1000 random buckets");
}

#[test]
fn criterion_4_text_metrics_match_independent_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for trial in 0..100 {
        let candidate = common::random_tokens(&mut rng, 12);
        let reference = common::random_tokens(&mut rng, 12);
        for n in [1usize, 2, 4] {
            let got = bleu(&candidate, &reference, n);
            let want = common::bleu_oracle(&candidate, &reference, n);
            assert!((got - want).abs() < 1e-9, "trial {trial}: BLEU-{n} {got} vs {want}");
        }
        for (variant, want) in [
            (RougeVariant::One, common::rouge_n_oracle(&candidate, &reference, 1)),
            (RougeVariant::Two, common::rouge_n_oracle(&candidate, &reference, 2)),
            (RougeVariant::L, common::rouge_l_oracle(&candidate, &reference)),
        ] {
            let got = rouge(&candidate, &reference, variant);
            assert!((got - want).abs() < 1e-9, "trial {trial}: ROUGE {got} vs {want}");
        }
        let got = ntlev(&candidate, &reference);
        let want = common::ntlev_oracle(&candidate, &reference);
        assert!((got - want).abs() < 1e-9, "trial {trial}: NTLev {got} vs {want}");
    }

    // AOD term against exhaustive enumeration of all 25 level pairs.
    let mut checked = 0;
    for gt in LogLevel::ALL {
        for llm in LogLevel::ALL {
            let a = gt.ordinal() as i64;
            let s = llm.ordinal() as i64;
            let denom = a.max(4 - a);
            let want = 1.0 - (a - s).abs() as f64 / denom as f64;
            assert_eq!(aod_term(gt, llm), want, "({gt:?},{llm:?})");
            checked += 1;
        }
    }
    assert_eq!(checked, 25);
    assert!((aod_term(LogLevel::Info, LogLevel::Debug) - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(aod_term(LogLevel::Debug, LogLevel::Critical), 0.0);
    assert_eq!(aod_term(LogLevel::Warning, LogLevel::Warning), 1.0);
    println!("criterion 4: PASS — BLEU/ROUGE/NTLev match oracles on 100 pairs; AOD exact on all 25 level pairs");
}

#[test]
fn criterion_5_placement_partitions_and_worked_example() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for trial in 0..1000 {
        let buckets = rng.random_range(1..=40);
        let table: Vec<BucketCounts> = (0..buckets)
            .map(|b| {
                let gt_count = rng.random_range(0..=4);
                let llm_count =
                    if gt_count == 0 { rng.random_range(1..=4) } else { rng.random_range(0..=4) };
                BucketCounts {
                    file_id: format!("f{}.py", b % 3),
                    path: format!("global/p{b}"),
                    gt_count,
                    llm_count,
                }
            })
            .collect();
        let report = placement_metrics(&table).unwrap();
        let sum = report.overlogging_rate + report.underlogging_rate + report.agree_rate;
        assert!((sum - 1.0).abs() < 1e-12, "trial {trial}: partition broke: {sum}");
        if let Some(coverage) = report.coverage {
            let agree = report.path_counts.agreeing as f64;
            let under = report.path_counts.underlogged as f64;
            assert!((coverage - agree / (agree + under)).abs() < 1e-12, "trial {trial}");
        }
    }

    let example = [(1, 1), (2, 0), (0, 3), (1, 2)];
    let table: Vec<BucketCounts> = example
        .iter()
        .enumerate()
        .map(|(i, &(gt_count, llm_count))| BucketCounts {
            file_id: "w.py".into(),
            path: format!("global/p{i}"),
            gt_count,
            llm_count,
        })
        .collect();
    let report = placement_metrics(&table).unwrap();
    assert!((report.coverage.unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!((report.quantified_coverage_raw.unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(report.overlogging_rate, 0.25);
    assert_eq!(report.underlogging_rate, 0.25);
    println!("criterion 5: PASS — partition identity on 1000 tables; worked example exact");
}

#[test]
fn criterion_6_sample_size_and_deterministic_stratification() {
    assert_eq!(sample_size(114_522, 0.95, 0.05), 384);

    let mut records = Vec::new();
    for i in 0..2000usize {
        let category = Category::ALL[i % 3];
        records.push(CategorizedRecord {
            category,
            repo_id: "acme/demo".into(),
            file_id: format!("acme__demo/f{}.py", i % 37),
            path: format!("global/p{i}"),
            gt_line: Some(i + 1),
            llm_line: None,
            gt_level: None,
            llm_level: None,
            gt_text: Some("t".into()),
            llm_text: None,
            gt_vars: Vec::new(),
            llm_vars: Vec::new(),
            multi_flag: false,
        });
    }
    let plan = plan_sample(&records, 0.95, 0.05, 17);
    assert_eq!(plan.total_n, plan.allocation.values().sum::<usize>());
    assert_eq!(plan.total_n, sample_size(2000, 0.95, 0.05));
    let first = stratified_sample(&records, &plan);
    let second = stratified_sample(&records, &plan);
    assert_eq!(
        first.iter().map(|r| &r.path).collect::<Vec<_>>(),
        second.iter().map(|r| &r.path).collect::<Vec<_>>()
    );
    for category in Category::ALL {
        let drawn = first.iter().filter(|r| r.category == category).count();
        assert_eq!(drawn, plan.allocation[&category], "{category:?}");
    }
    println!("criterion 6: PASS — 384 at a 114,522-record population; allocation sums; draws are seed-stable");
}

#[test]
fn criterion_7_pipeline_is_deterministic_across_runs_and_worker_counts() {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus/run.toml");
    let binary = env!("CARGO_BIN_EXE_logstudy");
    let mut metrics = Vec::new();
    for jobs in ["1", "8", "1"] {
        let out = tempfile::tempdir().unwrap();
        let status = Command::new(binary)
            .args(["--config", config, "--offline", "--jobs", jobs, "run-all"])
            .arg("--out")
            .arg(out.path())
            .status()
            .unwrap();
        assert!(status.success(), "run-all failed with jobs={jobs}");
        metrics.push(std::fs::read(out.path().join("evaluate/metrics.json")).unwrap());
    }
    assert_eq!(metrics[0], metrics[1], "jobs=1 vs jobs=8 diverged");
    assert_eq!(metrics[0], metrics[2], "repeat run diverged");
    println!("criterion 7: PASS — metrics.json byte-identical across two runs and worker counts 1 and 8");
}

#[test]
fn criterion_8_corpus_scale_throughput() {
    let cfg = ExtractionConfig::default();
    let started = Instant::now();
    let mut gt_logs = Vec::new();
    let mut llm_logs = Vec::new();
    for seed in 0..1000u64 {
        let content = common::synthetic_python(seed, 140);
        let file = SourceFile::new("syn/big", format!("syn__big/f{seed}.py"), content);
        let extraction = extract_logs(&file, Origin::Gt, &cfg).unwrap();
        for (i, log) in extraction.logs.into_iter().enumerate() {
            let mut llm = log.clone();
            llm.origin = Origin::Llm;
            if i % 3 == 0 {
                llm.raw = format!("logger.info(\"rephrased {}\")", i);
                llm.template = format!("rephrased {}", i);
            }
            if i % 4 != 1 {
                llm_logs.push(llm);
            }
            gt_logs.push(log);
        }
    }
    let n_gt = gt_logs.len();
    let outcome = pair_logs(&index_by_path(gt_logs), &index_by_path(llm_logs));
    let placement = placement_metrics(&outcome.bucket_table).unwrap();
    let ingredients = ingredient_report(&outcome.pairs).unwrap();
    let elapsed = started.elapsed();
    assert!(n_gt > 1000, "synthetic corpus should be log-dense, got {n_gt}");
    assert!(placement.path_counts.total > 0);
    assert!(ingredients.level.n_pairs > 0);
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "extraction+pairing+metrics took {elapsed:?} for 1000 files"
    );
    println!(
        "criterion 8: PASS — 1000 files ({n_gt} logs) extracted, paired, and scored in {elapsed:?}"
    );
}
