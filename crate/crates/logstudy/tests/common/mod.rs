//! Shared helpers for integration tests: a deterministic synthetic Python
//! generator and independent metric oracles (brute force and full-matrix
//! DP) that the fast implementations are checked against.

#![allow(dead_code)]

use rand::RngExt;
use rand_chacha::ChaCha8Rng;

const WORDS: [&str; 16] = [
    "batch", "epoch", "shard", "cache", "model", "loader", "queue", "metric", "tensor", "grad",
    "state", "worker", "config", "step", "loss", "token",
];

const TOKEN_VOCAB: [&str; 6] = ["alpha", "beta", "gamma", "delta", "omega", "sigma"];

pub fn word(rng: &mut ChaCha8Rng) -> &'static str {
    WORDS[rng.random_range(0..WORDS.len())]
}

/// Uniform random token sequence over a small vocabulary, length 0..=max.
pub fn random_tokens(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<String> {
    let len = rng.random_range(0..=max_len);
    (0..len).map(|_| TOKEN_VOCAB[rng.random_range(0..TOKEN_VOCAB.len())].to_string()).collect()
}

// -----------------------------------------------------------------------
// Synthetic Python sources

struct PyGen {
    rng: ChaCha8Rng,
    out: String,
    counter: usize,
    budget: i32,
}

impl PyGen {
    fn fresh(&mut self, prefix: &str) -> String {
        self.counter += 1;
        format!("{prefix}{}", self.counter)
    }

    fn line(&mut self, indent: usize, text: &str) {
        for _ in 0..indent {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
        self.budget -= 1;
    }

    fn log_statement(&mut self, indent: usize) {
        let receiver = ["logger", "logging", "log"][self.rng.random_range(0..3)];
        let level = ["debug", "info", "warning", "error", "critical"]
            [self.rng.random_range(0..5)];
        let (a, b) = (word(&mut self.rng), word(&mut self.rng));
        let var = self.fresh("v");
        let call = match self.rng.random_range(0..4) {
            0 => format!("{receiver}.{level}(\"{a} {b} ready\")"),
            1 => format!("{receiver}.{level}(f\"{a} {{{var}}} {b}\")"),
            2 => format!("{receiver}.{level}(\"{a} %s {b}\", {var})"),
            _ => format!("{receiver}.{level}(\"{a} {{}} {b}\".format({var}))"),
        };
        self.line(indent, &format!("{var} = 0"));
        self.line(indent, &call);
    }

    fn suite(&mut self, indent: usize, depth: usize) {
        let statements = self.rng.random_range(1..=3).max(1);
        for _ in 0..statements {
            if self.budget <= 0 {
                self.line(indent, "pass");
                return;
            }
            let choice = if depth >= 3 { self.rng.random_range(0..4) } else { self.rng.random_range(0..10) };
            match choice {
                0 | 1 => {
                    let var = self.fresh("x");
                    let w = word(&mut self.rng);
                    let k: u32 = self.rng.random_range(0..9);
                    self.line(indent, &format!("{var} = len(\"{w}\") + {k}"));
                }
                2 => self.log_statement(indent),
                3 => {
                    let w = word(&mut self.rng);
                    self.line(indent, &format!("# {w} bookkeeping"));
                }
                4 => {
                    let var = self.fresh("c");
                    let k: u32 = self.rng.random_range(0..5);
                    self.line(indent, &format!("{var} = {k}"));
                    self.line(indent, &format!("if {var} % 2 == 0:"));
                    self.suite(indent + 1, depth + 1);
                    if self.rng.random_range(0..2) == 0 {
                        self.line(indent, "else:");
                        self.suite(indent + 1, depth + 1);
                    }
                }
                5 => {
                    let var = self.fresh("i");
                    let k: u32 = self.rng.random_range(1..6);
                    self.line(indent, &format!("for {var} in range({k}):"));
                    self.suite(indent + 1, depth + 1);
                }
                6 => {
                    let var = self.fresh("n");
                    let k: u32 = self.rng.random_range(1..5);
                    self.line(indent, &format!("{var} = {k}"));
                    self.line(indent, &format!("while {var} > 0:"));
                    self.line(indent + 1, &format!("{var} -= 1"));
                    self.suite(indent + 1, depth + 1);
                }
                7 => {
                    self.line(indent, "try:");
                    self.suite(indent + 1, depth + 1);
                    self.line(indent, "except ValueError:");
                    self.suite(indent + 1, depth + 1);
                }
                8 => {
                    let var = self.fresh("h");
                    self.line(indent, &format!("with open(\"data.txt\") as {var}:"));
                    self.suite(indent + 1, depth + 1);
                }
                _ => {
                    let w = word(&mut self.rng);
                    self.line(indent, &format!("print(\"{w}\")"));
                }
            }
        }
    }
}

/// A syntactically valid Python module with logging calls in assorted
/// styles and nesting. `budget` approximates the line count.
pub fn synthetic_python(seed: u64, budget: i32) -> String {
    use rand::SeedableRng;
    let mut ctx = PyGen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        out: String::new(),
        counter: 0,
        budget,
    };
    ctx.line(0, "\"\"\"Synthetic module for corpus tests.\"\"\"");
    ctx.line(0, "");
    ctx.line(0, "import logging");
    ctx.line(0, "");
    ctx.line(0, "logger = logging.getLogger(__name__)");
    ctx.line(0, "log = logger");
    ctx.line(0, "");
    if ctx.rng.random_range(0..3) == 0 {
        ctx.log_statement(0);
    }
    let functions = ctx.rng.random_range(2..=4);
    for f in 0..functions {
        ctx.line(0, &format!("def task_{f}(a, b=2):"));
        if ctx.rng.random_range(0..3) == 0 {
            ctx.line(1, "\"\"\"Do one unit of work.\"\"\"");
        }
        ctx.suite(1, 1);
        ctx.line(1, "return a");
        ctx.line(0, "");
        if ctx.budget <= 0 {
            break;
        }
    }
    ctx.line(0, "class Worker:");
    ctx.line(1, "def start(self):");
    ctx.suite(2, 1);
    ctx.out
}

// -----------------------------------------------------------------------
// Metric oracles

/// Greedy one-to-one n-gram matching; equivalent to clipped counts.
fn matched_ngrams(cand: &[String], refr: &[String], n: usize) -> (usize, usize, usize) {
    let c_ngrams: Vec<&[String]> = cand.windows(n).collect();
    let r_ngrams: Vec<&[String]> = refr.windows(n).collect();
    let mut used = vec![false; r_ngrams.len()];
    let mut matched = 0;
    for c in &c_ngrams {
        let hit = r_ngrams
            .iter()
            .enumerate()
            .find(|(i, r)| !used[*i] && *r == c)
            .map(|(i, _)| i);
        if let Some(i) = hit {
            used[i] = true;
            matched += 1;
        }
    }
    (matched, c_ngrams.len(), r_ngrams.len())
}

/// Brute-force smoothed BLEU with the same conventions as the library:
/// orders capped by both lengths, 1e-9 for zero-match orders, brevity
/// penalty exp(1 - r/c) when the candidate is shorter.
pub fn bleu_oracle(candidate: &[String], reference: &[String], order: usize) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let max_n = order.min(candidate.len()).min(reference.len());
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let (matched, c_count, _) = matched_ngrams(candidate, reference, n);
        let p = if matched == 0 { 1e-9 } else { matched as f64 / c_count as f64 };
        log_sum += p.ln();
    }
    let mean = (log_sum / max_n as f64).exp();
    let bp = if candidate.len() < reference.len() {
        (1.0 - reference.len() as f64 / candidate.len() as f64).exp()
    } else {
        1.0
    };
    bp * mean
}

/// n-gram ROUGE F1 by brute force.
pub fn rouge_n_oracle(candidate: &[String], reference: &[String], n: usize) -> f64 {
    if candidate.len() < n || reference.len() < n {
        return 0.0;
    }
    let (matched, c_count, r_count) = matched_ngrams(candidate, reference, n);
    if matched == 0 {
        return 0.0;
    }
    let p = matched as f64 / c_count as f64;
    let r = matched as f64 / r_count as f64;
    2.0 * p * r / (p + r)
}

/// Full-matrix longest common subsequence.
pub fn lcs_oracle(a: &[String], b: &[String]) -> usize {
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            table[i][j] = if a[i - 1] == b[j - 1] {
                table[i - 1][j - 1] + 1
            } else {
                table[i - 1][j].max(table[i][j - 1])
            };
        }
    }
    table[a.len()][b.len()]
}

/// LCS-based ROUGE F1 by full-matrix DP.
pub fn rouge_l_oracle(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let lcs = lcs_oracle(candidate, reference);
    if lcs == 0 {
        return 0.0;
    }
    let p = lcs as f64 / candidate.len() as f64;
    let r = lcs as f64 / reference.len() as f64;
    2.0 * p * r / (p + r)
}

/// Full-matrix token Levenshtein, normalized by the longer length.
pub fn ntlev_oracle(a: &[String], b: &[String]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in table.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        table[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = table[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            table[i][j] = sub.min(table[i - 1][j] + 1).min(table[i][j - 1] + 1);
        }
    }
    table[a.len()][b.len()] as f64 / a.len().max(b.len()) as f64
}
