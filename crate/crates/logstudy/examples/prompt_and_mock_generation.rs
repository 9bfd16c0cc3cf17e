//! Build the generation prompt for a stripped file, run it through the
//! offline mock provider, and show the returned file plus cache behavior.
//! The second call hits the prompt cache instead of the provider.

use logstudy::generation::{generate, build_prompt, GenerationConfig, MockLoggerProvider, PromptCache};
use logstudy::source::{strip_file, ExtractionConfig, SourceFile};

const ORIGINAL: &str = r#"import logging


def train(model, data):
    logging.info("training started")
    for batch in data:
        model.step(batch)
    return model
"#;

fn main() {
    let file = SourceFile::new("demo/repo", "demo__repo/train.py", ORIGINAL);
    let stripped = strip_file(&file, &ExtractionConfig::default()).expect("file parses");

    let prompt = build_prompt(&stripped);
    println!("--- prompt (first 12 lines) ---");
    for line in prompt.lines().take(12) {
        println!("{line}");
    }
    println!("... [{} chars total]\n", prompt.len());

    let cfg = GenerationConfig { model_id: "mock-logger".into(), ..GenerationConfig::default() };
    let provider = MockLoggerProvider;
    let cache_dir = tempdir();
    let cache = PromptCache::new(&cache_dir);

    let record = generate(&stripped, &cfg, &provider, &cache).expect("mock cannot fail");
    println!("--- generated file (valid: {}) ---\n{}", record.valid, record.generated_source);

    let again = generate(&stripped, &cfg, &provider, &cache).unwrap();
    println!("second call served from cache: {}", again.provider_metadata.contains_key("cached"));

    std::fs::remove_dir_all(&cache_dir).ok();
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("logstudy-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
