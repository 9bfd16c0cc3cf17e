//! Log and comment removal.
//!
//! Removal operates on byte ranges of the original text: whole log
//! statements (multi-line calls included), `#` comments, and docstrings.
//! A block whose statements are all removed gets a single `pass` in place
//! of its first removed statement so the output stays parseable. Lines
//! that removal leaves whitespace-only are dropped; untouched files pass
//! through byte-identical.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use super::parser;
use super::recognize::{classify_call, Classified};
use super::{ExtractionConfig, SourceError, SourceFile};

/// A source file with logs, comments, and docstrings removed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrippedFile {
    pub file_id: String,
    pub content: String,
    /// Removed log statements, unresolved-level `.log` calls included.
    pub removed_logs: usize,
    /// Lines occupied by removed comments and docstrings.
    pub removed_comment_lines: usize,
}

/// Strip `file` of log statements, comments, and docstrings.
pub fn strip_file(file: &SourceFile, cfg: &ExtractionConfig) -> Result<StrippedFile, SourceError> {
    let src = file.content.as_str();
    let tree = parser::parse(src).map_err(|p| SourceError::Parse {
        file_id: file.file_id.clone(),
        line: p.line,
        column: p.column,
    })?;

    let mut removals = Removals::default();
    collect(tree.root_node(), src, cfg, &mut removals);

    // Comments inside a removed statement's span (e.g. trailing comments in
    // a multi-line call) are already covered; drop them so they are neither
    // double-spliced nor double-counted.
    let stmt_spans: Vec<(usize, usize)> = removals
        .statements
        .iter()
        .map(|r| (r.start, r.end))
        .chain(removals.docstrings.iter().map(|r| (r.start, r.end)))
        .collect();
    removals.comments.retain(|c| {
        !stmt_spans.iter().any(|&(s, e)| s <= c.start && c.end <= e)
    });

    let removed_logs = removals.statements.len();
    let removed_comment_lines: usize = removals
        .comments
        .iter()
        .chain(removals.docstrings.iter())
        .map(|r| r.lines)
        .sum();

    let removed_set: HashSet<(usize, usize)> = removals
        .statements
        .iter()
        .chain(removals.docstrings.iter())
        .map(|r| (r.start, r.end))
        .chain(removals.comments.iter().map(|r| (r.start, r.end)))
        .collect();
    let pass_sites = pass_sites(tree.root_node(), &removed_set);

    let mut edits: Vec<Edit> = Vec::new();
    for span in removals
        .statements
        .iter()
        .chain(removals.docstrings.iter())
        .chain(removals.comments.iter())
    {
        if pass_sites.contains(&(span.start, span.end)) {
            edits.push(Edit { start: span.start, end: span.end, replacement: "pass" });
        } else {
            let (start, end) = eat_semicolon(src, span.start, span.end);
            edits.push(Edit { start, end, replacement: "" });
        }
    }
    let content = splice(src, edits);
    Ok(StrippedFile {
        file_id: file.file_id.clone(),
        content,
        removed_logs,
        removed_comment_lines,
    })
}

#[derive(Debug, Clone, Copy)]
struct Span {
    start: usize,
    end: usize,
    lines: usize,
}

fn span_of(node: Node) -> Span {
    Span {
        start: node.start_byte(),
        end: node.end_byte(),
        lines: node.end_position().row - node.start_position().row + 1,
    }
}

#[derive(Default)]
struct Removals {
    statements: Vec<Span>,
    docstrings: Vec<Span>,
    comments: Vec<Span>,
}

fn collect(node: Node, src: &str, cfg: &ExtractionConfig, out: &mut Removals) {
    match node.kind() {
        "comment" => out.comments.push(span_of(node)),
        "module" => {
            if let Some(doc) = docstring_of(node) {
                out.docstrings.push(span_of(doc));
            }
        }
        "block" => {
            let parent_kind = node.parent().map(|p| p.kind()).unwrap_or("");
            if matches!(parent_kind, "function_definition" | "class_definition") {
                if let Some(doc) = docstring_of(node) {
                    out.docstrings.push(span_of(doc));
                }
            }
        }
        "expression_statement" => {
            if let Some(expr) = node.named_child(0) {
                if expr.kind() == "call" {
                    match classify_call(expr, src, cfg) {
                        Some(Classified::Log(_)) | Some(Classified::UnresolvedLevel(_)) => {
                            out.statements.push(span_of(node));
                            // Nothing inside a removed statement matters,
                            // but its comments still need covering checks,
                            // so keep walking.
                        }
                        None => {}
                    }
                }
            }
        }
        _ => {}
    }
    let mut cursor = node.walk();
    let children: Vec<Node> = node.children(&mut cursor).collect();
    for child in children {
        collect(child, src, cfg, out);
    }
}

/// First statement of a suite when it is a bare string literal.
fn docstring_of<'t>(body: Node<'t>) -> Option<Node<'t>> {
    let mut cursor = body.walk();
    let first = body.named_children(&mut cursor).find(|n| n.kind() != "comment")?;
    if first.kind() != "expression_statement" || first.named_child_count() != 1 {
        return None;
    }
    let only = first.named_child(0)?;
    matches!(only.kind(), "string" | "concatenated_string").then_some(first)
}

/// Ranges that receive a `pass` replacement: the first removed statement of
/// every block whose statements are all removed.
fn pass_sites(root: Node, removed: &HashSet<(usize, usize)>) -> HashSet<(usize, usize)> {
    let mut sites = HashSet::new();
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        let mut cursor = node.walk();
        let children: Vec<Node> = node.children(&mut cursor).collect();
        if node.kind() == "block" {
            let statements: Vec<&Node> =
                children.iter().filter(|n| n.is_named() && n.kind() != "comment").collect();
            let all_removed = !statements.is_empty()
                && statements
                    .iter()
                    .all(|n| removed.contains(&(n.start_byte(), n.end_byte())));
            if all_removed {
                let first = statements[0];
                sites.insert((first.start_byte(), first.end_byte()));
            }
        }
        stack.extend(children);
    }
    sites
}

/// Extend a removed statement's range over an adjacent `;` separator so
/// `a(); b()` degrades cleanly whichever side is removed.
fn eat_semicolon(src: &str, start: usize, end: usize) -> (usize, usize) {
    let bytes = src.as_bytes();
    let mut fwd = end;
    while fwd < bytes.len() && (bytes[fwd] == b' ' || bytes[fwd] == b'\t') {
        fwd += 1;
    }
    if fwd < bytes.len() && bytes[fwd] == b';' {
        fwd += 1;
        while fwd < bytes.len() && (bytes[fwd] == b' ' || bytes[fwd] == b'\t') {
            fwd += 1;
        }
        return (start, fwd);
    }
    let mut back = start;
    while back > 0 && (bytes[back - 1] == b' ' || bytes[back - 1] == b'\t') {
        back -= 1;
    }
    if back > 0 && bytes[back - 1] == b';' {
        return (back - 1, end);
    }
    (start, end)
}

struct Edit {
    start: usize,
    end: usize,
    replacement: &'static str,
}

/// Apply edits and drop lines that edits reduced to whitespace.
fn splice(src: &str, mut edits: Vec<Edit>) -> String {
    edits.sort_by_key(|e| (e.start, e.end));
    // Overlaps only arise from semicolon extensions between adjacent
    // removed statements; merging concatenates replacements, which keeps a
    // `pass` if one side carries it.
    let mut merged: Vec<Edit> = Vec::new();
    for edit in edits {
        match merged.last_mut() {
            Some(last) if edit.start < last.end => {
                last.end = last.end.max(edit.end);
                if last.replacement.is_empty() {
                    last.replacement = edit.replacement;
                }
            }
            _ => merged.push(edit),
        }
    }

    let mut out = String::with_capacity(src.len());
    let mut line_start = 0;
    let mut edit_idx = 0;
    while line_start <= src.len() {
        let line_end = src[line_start..]
            .find('\n')
            .map(|i| line_start + i)
            .unwrap_or(src.len());
        let has_newline = line_end < src.len();
        if line_start == src.len() && !has_newline && line_start != 0 {
            break;
        }

        let mut touched = false;
        let mut text = String::new();
        let mut pos = line_start;
        let mut idx = edit_idx;
        while idx < merged.len() && merged[idx].start < line_end {
            let edit = &merged[idx];
            if edit.end <= line_start {
                idx += 1;
                continue;
            }
            touched = true;
            if edit.start > pos {
                text.push_str(&src[pos..edit.start]);
            }
            if edit.start >= line_start {
                text.push_str(edit.replacement);
            }
            pos = edit.end.min(line_end).max(pos);
            if edit.end > line_end {
                break;
            }
            idx += 1;
        }
        // An edit started on an earlier line may still cover this one.
        if edit_idx < merged.len()
            && merged[edit_idx].start < line_start
            && merged[edit_idx].end > line_start
        {
            touched = true;
            pos = pos.max(merged[edit_idx].end.min(line_end));
        }
        if pos < line_end {
            text.push_str(&src[pos..line_end]);
        }
        // Advance past edits fully consumed by this line.
        while edit_idx < merged.len() && merged[edit_idx].end <= line_end {
            edit_idx += 1;
        }

        if touched {
            let trimmed = text.trim_end_matches([' ', '\t', '\r']);
            if !trimmed.is_empty() {
                out.push_str(trimmed);
                if has_newline {
                    out.push('\n');
                }
            }
        } else {
            out.push_str(&text);
            if has_newline {
                out.push('\n');
            }
        }
        if !has_newline {
            break;
        }
        line_start = line_end + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{extract_logs, Origin};
    use super::*;

    fn strip(content: &str) -> StrippedFile {
        let file = SourceFile::new("acme__demo", "acme__demo/m.py", content);
        strip_file(&file, &ExtractionConfig::default()).unwrap()
    }

    fn assert_clean(stripped: &StrippedFile) {
        assert!(parser::parses(&stripped.content), "output must parse:\n{}", stripped.content);
        let file = SourceFile::new("acme__demo", stripped.file_id.clone(), stripped.content.clone());
        let again = extract_logs(&file, Origin::Gt, &ExtractionConfig::default()).unwrap();
        assert!(again.logs.is_empty(), "no logs may survive:\n{}", stripped.content);
    }

    #[test]
    fn strips_nested_branches_and_repairs_emptied_block() {
        let src = "\
class Analysis():
    def __init__(self, data, message):
        logger.info(\"Initializing\")

        if data is None:
            logger.debug(\"Data not yet available\")
        else:
            logger.debug(\"Data available\")
        if message is None:
            logger.debug(\"No message received\")
";
        let stripped = strip(src);
        assert_clean(&stripped);
        assert_eq!(stripped.removed_logs, 4);
        assert_eq!(
            stripped.content,
            "\
class Analysis():
    def __init__(self, data, message):

        if data is None:
            pass
        else:
            pass
        if message is None:
            pass
"
        );
    }

    #[test]
    fn file_without_logs_or_comments_is_unchanged() {
        let src = "import numpy as np\n\n\ndef add(a, b):\n    return a + b\n";
        let stripped = strip(src);
        assert_eq!(stripped.content, src);
        assert_eq!(stripped.removed_logs, 0);
        assert_eq!(stripped.removed_comment_lines, 0);
    }

    #[test]
    fn stripping_is_idempotent() {
        let src = "\
\"\"\"Module docs.\"\"\"
import logging  # setup

logger = logging.getLogger(__name__)


def fit(x):
    '''Fit the model.'''
    logger.info(\"fitting\")
    # tune
    return x
";
        let once = strip(src);
        assert_clean(&once);
        let twice = strip(&once.content);
        assert_eq!(once.content, twice.content);
        assert_eq!(twice.removed_logs, 0);
        assert_eq!(twice.removed_comment_lines, 0);
    }

    #[test]
    fn comment_and_docstring_lines_are_counted() {
        let src = "\
\"\"\"Two
lines.\"\"\"
# one
x = 1  # two
";
        let stripped = strip(src);
        assert_clean(&stripped);
        assert_eq!(stripped.removed_comment_lines, 4);
        assert_eq!(stripped.content, "x = 1\n");
    }

    #[test]
    fn multiline_call_with_trailing_comment_is_removed_whole() {
        let src = "\
def f(x):
    logger.info(
        \"big %s\",  # which one
        x,
    )
    return x
";
        let stripped = strip(src);
        assert_clean(&stripped);
        assert_eq!(stripped.removed_logs, 1);
        assert_eq!(stripped.content, "def f(x):\n    return x\n");
    }

    #[test]
    fn inline_suite_gets_inline_pass() {
        let stripped = strip("if ready: logger.info(\"go\")\n");
        assert_clean(&stripped);
        assert_eq!(stripped.content, "if ready: pass\n");
    }

    #[test]
    fn semicolon_separated_statements() {
        let stripped = strip("x = 1; logger.info(\"a\")\n");
        assert_clean(&stripped);
        assert_eq!(stripped.content, "x = 1\n");

        let stripped = strip("logger.info(\"a\"); x = 1\n");
        assert_clean(&stripped);
        assert_eq!(stripped.content, "x = 1\n");

        let stripped = strip("def f():\n    logger.info(\"a\"); logger.info(\"b\")\n");
        assert_clean(&stripped);
        assert_eq!(stripped.content, "def f():\n    pass\n");
    }

    #[test]
    fn emptied_try_branches_each_get_pass() {
        let src = "\
def f():
    try:
        logger.info(\"try\")
    except Exception:
        logger.exception(\"boom\")
    finally:
        logger.debug(\"done\")
";
        let stripped = strip(src);
        assert_clean(&stripped);
        assert_eq!(
            stripped.content,
            "\
def f():
    try:
        pass
    except Exception:
        pass
    finally:
        pass
"
        );
    }

    #[test]
    fn unresolved_dynamic_levels_are_stripped_too() {
        let src = "def f(lvl):\n    logger.log(lvl, \"dyn\")\n    return 1\n";
        let stripped = strip(src);
        assert_clean(&stripped);
        assert_eq!(stripped.removed_logs, 1);
        assert!(!stripped.content.contains("logger.log"));
    }

    #[test]
    fn class_with_docstring_only_body_gets_pass() {
        let stripped = strip("class Marker:\n    \"\"\"Just docs.\"\"\"\n");
        assert_clean(&stripped);
        assert_eq!(stripped.content, "class Marker:\n    pass\n");
    }

    #[test]
    fn string_statements_deeper_in_blocks_are_kept() {
        let src = "def f():\n    x = 1\n    \"not a docstring\"\n    return x\n";
        let stripped = strip(src);
        assert_clean(&stripped);
        assert_eq!(stripped.content, src);
    }

    #[test]
    fn file_without_trailing_newline() {
        let stripped = strip("x = 1  # note");
        assert_clean(&stripped);
        assert_eq!(stripped.content, "x = 1");
    }

    #[test]
    fn parse_error_is_propagated() {
        let file = SourceFile::new("r", "r/broken.py", "def f(:\n");
        assert!(matches!(
            strip_file(&file, &ExtractionConfig::default()),
            Err(SourceError::Parse { .. })
        ));
    }
}
