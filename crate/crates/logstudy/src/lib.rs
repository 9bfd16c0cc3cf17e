//! Corpus harness for evaluating LLM-generated log statements in Python
//! machine-learning projects.
//!
//! The pipeline mines a corpus of Python files that use the `logging`
//! library, strips their log statements (plus comments and docstrings),
//! asks a model to re-log each stripped file whole, and then compares the
//! generated logs against the originals: where logs were placed, what level
//! and variables they carry, and how similar the message text is. A final
//! stage categorizes disagreements and draws a stratified sample for manual
//! review.
//!
//! Modules, in pipeline order:
//!
//! - [`corpus`]: repository selection, file collection, and the corpus
//!   manifest with summary statistics.
//! - [`source`]: tree-sitter parsing, log-statement recognition, AST code
//!   paths, and log stripping.
//! - [`generation`]: prompt construction, providers (mock, replay, HTTP),
//!   retries, and the on-disk prompt cache.
//! - [`pairing`]: bucketing logs by (file, code path) and matching
//!   ground-truth logs to generated ones by token cosine similarity.
//! - [`metrics`]: placement rates over the bucket table and per-pair
//!   level/variable/text ingredient scores.
//! - [`study`]: disagreement categories, sample-size math, stratified
//!   sampling, and the review-sheet CSV.
//! - [`cli`]: the staged command-line pipeline with content-addressed,
//!   resumable stage outputs.
//!
//! Each capability has a runnable example (`cargo run --example <name>`):
//! `extract_paths`, `strip_source`, `prompt_and_mock_generation`,
//! `pair_scenarios`, `metric_suite`, `sampling_plan`, and `end_to_end`,
//! which drives every stage against the fixture corpus bundled under
//! `fixtures/corpus/`.

pub mod cli;
pub mod corpus;
pub mod generation;
pub mod metrics;
pub mod pairing;
pub mod source;
pub mod study;

pub(crate) mod util;
