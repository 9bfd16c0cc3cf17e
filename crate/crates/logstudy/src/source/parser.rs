//! Thin wrapper around the tree-sitter Python grammar.
//!
//! One parser per thread; tree-sitter parsers are cheap to keep but not
//! `Sync`.

use std::cell::RefCell;

use tree_sitter::{Node, Parser, Tree};

thread_local! {
    static PARSER: RefCell<Parser> = RefCell::new(new_parser());
}

fn new_parser() -> Parser {
    let mut parser = Parser::new();
    parser
        .set_language(&tree_sitter_python::LANGUAGE.into())
        .expect("python grammar is version-compatible");
    parser
}

/// 1-based position of the first syntax error in a rejected file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParsePoint {
    pub line: usize,
    pub column: usize,
}

/// Parse `content`, rejecting any tree that contains error or missing nodes.
pub fn parse(content: &str) -> Result<Tree, ParsePoint> {
    let tree = PARSER.with(|parser| {
        parser
            .borrow_mut()
            .parse(content, None)
            .expect("no timeout or cancellation configured")
    });
    let root = tree.root_node();
    if root.has_error() {
        let point = first_error(root).map(|n| n.start_position()).unwrap_or_else(|| root.start_position());
        return Err(ParsePoint { line: point.row + 1, column: point.column + 1 });
    }
    Ok(tree)
}

/// Whether `content` is syntactically valid Python.
pub fn parses(content: &str) -> bool {
    parse(content).is_ok()
}

fn first_error(node: Node) -> Option<Node> {
    if node.is_error() || node.is_missing() {
        return Some(node);
    }
    if !node.has_error() {
        return None;
    }
    let mut cursor = node.walk();
    let children: Vec<Node> = node.children(&mut cursor).collect();
    children.into_iter().find_map(first_error)
}

/// Source text of a node.
pub fn node_text<'a>(node: Node, source: &'a str) -> &'a str {
    &source[node.byte_range()]
}
