//! Log extraction with code-path assignment.
//!
//! Depth-first traversal with a frame stack rooted at `global`. Class and
//! function frames carry their declared name; control frames carry
//! `<kind><n>` where `n` counts entries of that kind within the current
//! parent frame, in source order. `elif` branches count as further `if`
//! entries of the same parent; `else`, `except` and `finally` are numbered
//! independently of the statement that introduced them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use super::parser::{self, node_text};
use super::recognize::{classify_call, ingredients, Classified};
use super::{CodePath, ExtractionConfig, LogStatement, Origin, SourceError, SourceFile};

/// A `.log(expr, …)` call whose level is not a recognizable constant.
/// Excluded from extraction results and counted separately.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnresolvedLevel {
    pub line: usize,
    pub raw: String,
}

/// Logs extracted from one file.
#[derive(Debug, Clone)]
pub struct Extraction {
    /// Recognized logs sorted by line.
    pub logs: Vec<LogStatement>,
    pub unresolved: Vec<UnresolvedLevel>,
}

/// Extract every recognized log statement from `file`, tagging each with
/// `origin` and its code path.
pub fn extract_logs(
    file: &SourceFile,
    origin: Origin,
    cfg: &ExtractionConfig,
) -> Result<Extraction, SourceError> {
    let tree = parser::parse(&file.content).map_err(|p| SourceError::Parse {
        file_id: file.file_id.clone(),
        line: p.line,
        column: p.column,
    })?;
    let mut visitor = Visitor {
        src: &file.content,
        cfg,
        origin,
        repo_id: &file.repo_id,
        file_id: &file.file_id,
        stack: vec![Frame { label: "global".to_string(), counters: BTreeMap::new() }],
        logs: Vec::new(),
        unresolved: Vec::new(),
    };
    visitor.visit_children(tree.root_node());
    let mut logs = visitor.logs;
    logs.sort_by_key(|log| log.line);
    Ok(Extraction { logs, unresolved: visitor.unresolved })
}

struct Frame {
    label: String,
    /// Per-kind entry counts for control frames opened directly below this
    /// frame. Dropped with the frame, which resets sibling numbering.
    counters: BTreeMap<&'static str, u32>,
}

struct Visitor<'a> {
    src: &'a str,
    cfg: &'a ExtractionConfig,
    origin: Origin,
    repo_id: &'a str,
    file_id: &'a str,
    stack: Vec<Frame>,
    logs: Vec<LogStatement>,
    unresolved: Vec<UnresolvedLevel>,
}

impl<'a> Visitor<'a> {
    fn visit_children(&mut self, node: Node) {
        let mut cursor = node.walk();
        let children: Vec<Node> = node.named_children(&mut cursor).collect();
        for child in children {
            self.visit_statement(child);
        }
    }

    fn visit_statement(&mut self, node: Node) {
        match node.kind() {
            "expression_statement" => {
                if let Some(expr) = node.named_child(0) {
                    if expr.kind() == "call" {
                        self.record_call(expr);
                    }
                }
            }
            "decorated_definition" => {
                if let Some(definition) = node.child_by_field_name("definition") {
                    self.visit_statement(definition);
                }
            }
            "function_definition" | "class_definition" => {
                let name = node
                    .child_by_field_name("name")
                    .map(|n| node_text(n, self.src).to_string())
                    .unwrap_or_else(|| node.kind().to_string());
                self.enter_named(name);
                if let Some(body) = node.child_by_field_name("body") {
                    self.visit_children(body);
                }
                self.exit();
            }
            "if_statement" => {
                if let Some(consequence) = node.child_by_field_name("consequence") {
                    self.enter_control("if");
                    self.visit_children(consequence);
                    self.exit();
                }
                let mut cursor = node.walk();
                let branches: Vec<Node> =
                    node.children_by_field_name("alternative", &mut cursor).collect();
                for branch in branches {
                    match branch.kind() {
                        "elif_clause" => {
                            if let Some(consequence) = branch.child_by_field_name("consequence") {
                                self.enter_control("if");
                                self.visit_children(consequence);
                                self.exit();
                            }
                        }
                        "else_clause" => self.visit_else(branch),
                        _ => {}
                    }
                }
            }
            "for_statement" | "while_statement" => {
                let kind = if node.kind() == "for_statement" { "for" } else { "while" };
                if let Some(body) = node.child_by_field_name("body") {
                    self.enter_control(kind);
                    self.visit_children(body);
                    self.exit();
                }
                if let Some(alt) = node.child_by_field_name("alternative") {
                    if alt.kind() == "else_clause" {
                        self.visit_else(alt);
                    }
                }
            }
            "try_statement" => {
                if let Some(body) = node.child_by_field_name("body") {
                    self.enter_control("try");
                    self.visit_children(body);
                    self.exit();
                }
                let mut cursor = node.walk();
                let clauses: Vec<Node> = node.named_children(&mut cursor).collect();
                for clause in clauses {
                    match clause.kind() {
                        "except_clause" | "except_group_clause" => {
                            if let Some(block) = first_block(clause) {
                                self.enter_control("except");
                                self.visit_children(block);
                                self.exit();
                            }
                        }
                        "else_clause" => self.visit_else(clause),
                        "finally_clause" => {
                            if let Some(block) = first_block(clause) {
                                self.enter_control("finally");
                                self.visit_children(block);
                                self.exit();
                            }
                        }
                        _ => {}
                    }
                }
            }
            "with_statement" => {
                if let Some(body) = node.child_by_field_name("body") {
                    self.enter_control("with");
                    self.visit_children(body);
                    self.exit();
                }
            }
            "match_statement" => {
                // match/case is outside the tracked kind set: case bodies
                // inherit the enclosing frame's path.
                if let Some(body) = node.child_by_field_name("body") {
                    let mut cursor = body.walk();
                    let cases: Vec<Node> = body.named_children(&mut cursor).collect();
                    for case in cases {
                        if case.kind() == "case_clause" {
                            if let Some(consequence) = case.child_by_field_name("consequence") {
                                self.visit_children(consequence);
                            }
                        }
                    }
                }
            }
            _ => {}
        }
    }

    fn visit_else(&mut self, clause: Node) {
        if let Some(body) = clause.child_by_field_name("body") {
            self.enter_control("else");
            self.visit_children(body);
            self.exit();
        }
    }

    fn enter_named(&mut self, label: String) {
        self.stack.push(Frame { label, counters: BTreeMap::new() });
    }

    fn enter_control(&mut self, kind: &'static str) {
        let parent = self.stack.last_mut().expect("stack is never empty");
        let count = parent.counters.entry(kind).or_insert(0);
        *count += 1;
        let label = format!("{kind}{count}");
        self.stack.push(Frame { label, counters: BTreeMap::new() });
    }

    fn exit(&mut self) {
        self.stack.pop();
    }

    fn record_call(&mut self, call: Node) {
        match classify_call(call, self.src, self.cfg) {
            Some(Classified::Log(parts)) => {
                let (template, variables) = ingredients(&parts, self.src);
                self.logs.push(LogStatement {
                    origin: self.origin,
                    repo_id: self.repo_id.to_string(),
                    file_id: self.file_id.to_string(),
                    path: CodePath::from_labels(
                        self.stack.iter().map(|f| f.label.clone()),
                    ),
                    line: parts.call.start_position().row + 1,
                    level: parts.level,
                    raw: node_text(parts.call, self.src).to_string(),
                    template,
                    variables,
                });
            }
            Some(Classified::UnresolvedLevel(call)) => self.unresolved.push(UnresolvedLevel {
                line: call.start_position().row + 1,
                raw: node_text(call, self.src).to_string(),
            }),
            None => {}
        }
    }
}

fn first_block<'t>(node: Node<'t>) -> Option<Node<'t>> {
    let mut cursor = node.walk();
    let found = node.named_children(&mut cursor).find(|n| n.kind() == "block");
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    const NESTED_BRANCHES: &str = "\
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

    fn extract(content: &str) -> Extraction {
        let file = SourceFile::new("acme__demo", "acme__demo/m.py", content);
        extract_logs(&file, Origin::Gt, &ExtractionConfig::default()).unwrap()
    }

    fn paths(content: &str) -> Vec<(usize, String)> {
        extract(content).logs.iter().map(|l| (l.line, l.path.as_string())).collect()
    }

    #[test]
    fn nested_branch_paths() {
        assert_eq!(
            paths(NESTED_BRANCHES),
            vec![
                (3, "global/Analysis/__init__".to_string()),
                (6, "global/Analysis/__init__/if1".to_string()),
                (8, "global/Analysis/__init__/else1".to_string()),
                (10, "global/Analysis/__init__/if2".to_string()),
            ]
        );
    }

    #[test]
    fn module_level_log_is_global() {
        assert_eq!(paths("import logging\nlogging.info(\"boot\")\n"), vec![(2, "global".to_string())]);
    }

    #[test]
    fn sibling_loops_number_independently() {
        let src = "\
def run(xs):
    for x in xs:
        logger.info(\"first\")
    for x in xs:
        logger.info(\"second\")
";
        assert_eq!(
            paths(src),
            vec![(3, "global/run/for1".to_string()), (5, "global/run/for2".to_string())]
        );
    }

    #[test]
    fn counters_reset_when_parent_frame_exits() {
        let src = "\
def a():
    if x:
        logger.info(\"a\")

def b():
    if x:
        logger.info(\"b\")
";
        assert_eq!(
            paths(src),
            vec![(3, "global/a/if1".to_string()), (7, "global/b/if1".to_string())]
        );
    }

    #[test]
    fn elif_counts_as_another_if() {
        let src = "\
def f(x):
    if x == 1:
        logger.info(\"one\")
    elif x == 2:
        logger.info(\"two\")
    elif x == 3:
        logger.info(\"three\")
    else:
        logger.info(\"other\")
";
        assert_eq!(
            paths(src),
            vec![
                (3, "global/f/if1".to_string()),
                (5, "global/f/if2".to_string()),
                (7, "global/f/if3".to_string()),
                (9, "global/f/else1".to_string()),
            ]
        );
    }

    #[test]
    fn try_except_finally_frames() {
        let src = "\
def f():
    try:
        logger.info(\"try\")
    except ValueError:
        logger.error(\"bad value\")
    except Exception:
        logger.exception(\"boom\")
    else:
        logger.info(\"clean\")
    finally:
        logger.debug(\"done\")
";
        assert_eq!(
            paths(src),
            vec![
                (3, "global/f/try1".to_string()),
                (5, "global/f/except1".to_string()),
                (7, "global/f/except2".to_string()),
                (9, "global/f/else1".to_string()),
                (11, "global/f/finally1".to_string()),
            ]
        );
    }

    #[test]
    fn with_while_and_nesting() {
        let src = "\
def f():
    with open(p) as fh:
        while True:
            logger.info(\"loop\")
";
        assert_eq!(paths(src), vec![(4, "global/f/with1/while1".to_string())]);
    }

    #[test]
    fn decorated_and_async_definitions() {
        let src = "\
class C:
    @staticmethod
    async def go():
        logger.info(\"go\")
";
        assert_eq!(paths(src), vec![(4, "global/C/go".to_string())]);
    }

    #[test]
    fn unresolved_dynamic_level_is_excluded_and_counted() {
        let src = "\
import logging
logger.log(level, \"dynamic\")
logger.info(\"static\")
";
        let extraction = extract(src);
        assert_eq!(extraction.logs.len(), 1);
        assert_eq!(extraction.logs[0].line, 3);
        assert_eq!(extraction.unresolved.len(), 1);
        assert_eq!(extraction.unresolved[0].line, 2);
    }

    #[test]
    fn parse_errors_carry_position() {
        let file = SourceFile::new("r", "r/broken.py", "def f(:\n    pass\n");
        let err = extract_logs(&file, Origin::Gt, &ExtractionConfig::default()).unwrap_err();
        match err {
            SourceError::Parse { file_id, line, .. } => {
                assert_eq!(file_id, "r/broken.py");
                assert_eq!(line, 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn extraction_is_deterministic() {
        let a = extract(NESTED_BRANCHES);
        let b = extract(NESTED_BRANCHES);
        let dump = |e: &Extraction| serde_json::to_string(&e.logs).unwrap();
        assert_eq!(dump(&a), dump(&b));
    }

    #[test]
    fn multiline_call_located_at_first_token() {
        let src = "\
def f():
    logger.info(
        \"spread over\",
    )
";
        let extraction = extract(src);
        assert_eq!(extraction.logs[0].line, 2);
        assert!(extraction.logs[0].raw.contains("spread over"));
    }

    #[test]
    fn log_call_as_subexpression_is_out_of_scope() {
        let src = "\
x = logger.info(\"assigned\")
result = [logger.debug(\"inner\") for _ in range(2)]
";
        assert!(extract(src).logs.is_empty());
    }
}
