//! Log-call recognition and ingredient extraction.
//!
//! A statement is a log when its top-level expression is a call whose callee
//! is an attribute access `<receiver>.<method>(…)`, the method is one of the
//! `logging` API names, and the receiver's terminal identifier matches the
//! configured logger pattern. `.log(LEVEL, …)` only resolves when LEVEL is a
//! recognizable constant; other dynamic levels are reported as unresolved.

use std::sync::OnceLock;

use regex::Regex;
use tree_sitter::Node;

use super::parser::{self, node_text};
use super::{ExtractionConfig, LogLevel};
use crate::util::collapse_ws;

/// A recognized log call split into its parts. Node lifetimes are tied to
/// the parsed tree.
pub(crate) struct LogParts<'t> {
    pub call: Node<'t>,
    pub level: LogLevel,
    /// The message argument, if the call has one.
    pub message: Option<Node<'t>>,
    /// Positional arguments after the message.
    pub rest: Vec<Node<'t>>,
}

pub(crate) enum Classified<'t> {
    Log(LogParts<'t>),
    /// `.log(expr, …)` whose level expression is not a recognizable constant.
    UnresolvedLevel(Node<'t>),
}

fn method_level(name: &str) -> Option<LogLevel> {
    match name {
        "debug" => Some(LogLevel::Debug),
        "info" => Some(LogLevel::Info),
        "warning" | "warn" => Some(LogLevel::Warning),
        "error" | "exception" => Some(LogLevel::Error),
        "critical" => Some(LogLevel::Critical),
        _ => None,
    }
}

/// Rightmost simple name of a receiver expression: `self.logger` → `logger`,
/// `loggers` → `loggers`, `get()` → `get`.
fn terminal_identifier<'a>(node: Node, src: &'a str) -> Option<&'a str> {
    match node.kind() {
        "identifier" => Some(node_text(node, src)),
        "attribute" => terminal_identifier(node.child_by_field_name("attribute")?, src),
        "call" => terminal_identifier(node.child_by_field_name("function")?, src),
        "subscript" => terminal_identifier(node.child_by_field_name("value")?, src),
        "parenthesized_expression" => terminal_identifier(node.named_child(0)?, src),
        _ => None,
    }
}

/// Resolve a `.log` level argument when it is a constant: a level name
/// (`logging.WARN`, `"info"`, case-insensitive) or a numeric level
/// (10/20/30/40/50).
fn level_constant(node: Node, src: &str) -> Option<LogLevel> {
    let by_name = |name: &str| match name.to_ascii_lowercase().as_str() {
        "debug" => Some(LogLevel::Debug),
        "info" => Some(LogLevel::Info),
        "warning" | "warn" => Some(LogLevel::Warning),
        "error" => Some(LogLevel::Error),
        "critical" | "fatal" => Some(LogLevel::Critical),
        _ => None,
    };
    match node.kind() {
        "identifier" | "attribute" => by_name(terminal_identifier(node, src)?),
        "integer" => match node_text(node, src).parse::<i64>().ok()? {
            10 => Some(LogLevel::Debug),
            20 => Some(LogLevel::Info),
            30 => Some(LogLevel::Warning),
            40 => Some(LogLevel::Error),
            50 => Some(LogLevel::Critical),
            _ => None,
        },
        "string" => by_name(&string_text(node, src)),
        _ => None,
    }
}

/// Classify a `call` node. `None` means not a log call at all.
pub(crate) fn classify_call<'t>(
    call: Node<'t>,
    src: &str,
    cfg: &ExtractionConfig,
) -> Option<Classified<'t>> {
    if call.kind() != "call" {
        return None;
    }
    let function = call.child_by_field_name("function")?;
    if function.kind() != "attribute" {
        return None;
    }
    let method_node = function.child_by_field_name("attribute")?;
    let method = node_text(method_node, src);
    let receiver = function.child_by_field_name("object")?;
    let receiver_name = terminal_identifier(receiver, src)?;
    if !cfg.logger_pattern().is_match(receiver_name) {
        return None;
    }

    let args = positional_args(call);
    if method == "log" {
        let level = match args.first().and_then(|n| level_constant(*n, src)) {
            Some(level) => level,
            None => return Some(Classified::UnresolvedLevel(call)),
        };
        return Some(Classified::Log(LogParts {
            call,
            level,
            message: args.get(1).copied(),
            rest: args.get(2..).unwrap_or_default().to_vec(),
        }));
    }
    let level = method_level(method)?;
    Some(Classified::Log(LogParts {
        call,
        level,
        message: args.first().copied(),
        rest: args.get(1..).unwrap_or_default().to_vec(),
    }))
}

/// Positional arguments of a call, skipping keyword arguments and comments.
fn positional_args<'t>(call: Node<'t>) -> Vec<Node<'t>> {
    let Some(list) = call.child_by_field_name("arguments") else {
        return Vec::new();
    };
    let mut cursor = list.walk();
    list.named_children(&mut cursor)
        .filter(|n| !matches!(n.kind(), "keyword_argument" | "comment"))
        .collect()
}

/// Cooked text of a string literal: contents with common escapes decoded and
/// f-string interpolations kept verbatim (braces included) so the template
/// normalizer can remove them.
fn string_text(node: Node, src: &str) -> String {
    let mut out = String::new();
    let mut cursor = node.walk();
    for child in node.children(&mut cursor) {
        match child.kind() {
            "string_content" => {
                let mut inner = child.walk();
                if child.named_child_count() == 0 {
                    out.push_str(node_text(child, src));
                } else {
                    let mut pos = child.start_byte();
                    for part in child.children(&mut inner) {
                        out.push_str(&src[pos..part.start_byte()]);
                        out.push_str(&decode_escape(node_text(part, src)));
                        pos = part.end_byte();
                    }
                    out.push_str(&src[pos..child.end_byte()]);
                }
            }
            "escape_sequence" => out.push_str(&decode_escape(node_text(child, src))),
            "interpolation" => out.push_str(node_text(child, src)),
            _ => {}
        }
    }
    out
}

fn decode_escape(raw: &str) -> String {
    match raw {
        "\\n" | "\\r" | "\\t" => " ".to_string(),
        "\\\\" => "\\".to_string(),
        "\\'" => "'".to_string(),
        "\\\"" => "\"".to_string(),
        _ => raw.to_string(),
    }
}

/// Message text used for templates: cooked string content for literals,
/// concatenated pieces for adjacent literals, the format-string for
/// `"…".format(…)`, and raw source text otherwise.
pub(crate) fn message_text(node: Node, src: &str) -> String {
    match node.kind() {
        "string" => string_text(node, src),
        "concatenated_string" => {
            let mut cursor = node.walk();
            node.named_children(&mut cursor)
                .filter(|n| n.kind() == "string")
                .map(|n| string_text(n, src))
                .collect()
        }
        "call" if is_format_call(node, src) => {
            match node.child_by_field_name("function").and_then(|f| f.child_by_field_name("object")) {
                Some(object) => message_text(object, src),
                None => node_text(node, src).to_string(),
            }
        }
        _ => node_text(node, src).to_string(),
    }
}

fn is_format_call(call: Node, src: &str) -> bool {
    call.kind() == "call"
        && call
            .child_by_field_name("function")
            .filter(|f| f.kind() == "attribute")
            .and_then(|f| f.child_by_field_name("attribute"))
            .map(|a| node_text(a, src) == "format")
            .unwrap_or(false)
}

/// Ordered variable expressions of a recognized call: f-string
/// interpolations, positional arguments after the message, and `.format(…)`
/// arguments, in source order, whitespace-collapsed, first occurrence kept.
pub(crate) fn variables_from_parts(parts: &LogParts, src: &str) -> Vec<String> {
    let mut found: Vec<(usize, String)> = Vec::new();
    if let Some(message) = parts.message {
        collect_interpolations(message, src, &mut found);
        if is_format_call(message, src) {
            for arg in positional_and_keyword_values(message) {
                found.push((arg.start_byte(), collapse_ws(node_text(arg, src))));
            }
        }
    }
    for rest in &parts.rest {
        found.push((rest.start_byte(), collapse_ws(node_text(*rest, src))));
    }
    found.sort_by_key(|(offset, _)| *offset);
    let mut variables = Vec::new();
    for (_, text) in found {
        if !variables.contains(&text) {
            variables.push(text);
        }
    }
    variables
}

/// F-string interpolation expressions under `node`, with `!conversion` and
/// `:format` suffixes excluded (they are separate fields).
fn collect_interpolations(node: Node, src: &str, out: &mut Vec<(usize, String)>) {
    if node.kind() == "interpolation" {
        if let Some(expr) = node.child_by_field_name("expression") {
            out.push((expr.start_byte(), collapse_ws(node_text(expr, src))));
        }
        return;
    }
    let mut cursor = node.walk();
    for child in node.children(&mut cursor) {
        collect_interpolations(child, src, out);
    }
}

/// Arguments of a `.format(…)` call: positional expressions plus the value
/// side of keyword arguments.
fn positional_and_keyword_values<'t>(call: Node<'t>) -> Vec<Node<'t>> {
    let Some(list) = call.child_by_field_name("arguments") else {
        return Vec::new();
    };
    let mut cursor = list.walk();
    list.named_children(&mut cursor)
        .filter(|n| n.kind() != "comment")
        .map(|n| {
            if n.kind() == "keyword_argument" {
                n.child_by_field_name("value").unwrap_or(n)
            } else {
                n
            }
        })
        .collect()
}

static SPECIFIER: OnceLock<Regex> = OnceLock::new();

fn specifier_pattern() -> &'static Regex {
    SPECIFIER.get_or_init(|| {
        Regex::new(r"%[-+ #0]?[0-9]*(\.[0-9]+)?[sdifruxXeEgGc]").expect("static pattern compiles")
    })
}

/// Remove printf-style format specifiers and balanced `{…}` placeholder
/// spans from a message text, then collapse whitespace. Unmatched braces are
/// kept verbatim.
pub fn normalize_template(message_text: &str) -> String {
    let without_specifiers = specifier_pattern().replace_all(message_text, "");
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for (idx, ch) in without_specifiers.char_indices() {
        match ch {
            '{' => stack.push(idx),
            '}' => {
                if let Some(start) = stack.pop() {
                    spans.push((start, idx + 1));
                }
            }
            _ => {}
        }
    }
    // Keep only outermost spans; nested ones are covered by their parents.
    spans.sort_unstable();
    let mut kept = String::new();
    let mut pos = 0;
    for (start, end) in spans {
        if start >= pos {
            kept.push_str(&without_specifiers[pos..start]);
            pos = end;
        }
    }
    kept.push_str(&without_specifiers[pos..]);
    collapse_ws(&kept)
}

/// Template and variables of a recognized call.
pub(crate) fn ingredients(parts: &LogParts, src: &str) -> (String, Vec<String>) {
    let template = parts
        .message
        .map(|m| normalize_template(&message_text(m, src)))
        .unwrap_or_default();
    (template, variables_from_parts(parts, src))
}

/// A log call recognized from source text.
#[derive(Debug, Clone, PartialEq)]
pub struct RecognizedCall {
    pub level: LogLevel,
    /// Cooked message text, if the call has a message argument.
    pub message: Option<String>,
    /// Source text of positional arguments after the message.
    pub remaining_args: Vec<String>,
    pub template: String,
    pub variables: Vec<String>,
}

/// Recognize a single call expression given as source text. Returns `None`
/// for non-log calls, unparseable text, and `.log` calls with unresolvable
/// levels.
pub fn identify_log_call(call_text: &str, cfg: &ExtractionConfig) -> Option<RecognizedCall> {
    let tree = parser::parse(call_text).ok()?;
    let stmt = tree.root_node().named_child(0)?;
    if stmt.kind() != "expression_statement" {
        return None;
    }
    let call = stmt.named_child(0)?;
    match classify_call(call, call_text, cfg)? {
        Classified::Log(parts) => {
            let (template, variables) = ingredients(&parts, call_text);
            Some(RecognizedCall {
                level: parts.level,
                message: parts.message.map(|m| message_text(m, call_text)),
                remaining_args: parts
                    .rest
                    .iter()
                    .map(|n| collapse_ws(node_text(*n, call_text)))
                    .collect(),
                template,
                variables,
            })
        }
        Classified::UnresolvedLevel(_) => None,
    }
}

/// Variables of a recognized log call given as source text. Empty when the
/// text is not a recognized log call.
pub fn extract_variables(call_text: &str, cfg: &ExtractionConfig) -> Vec<String> {
    identify_log_call(call_text, cfg).map(|c| c.variables).unwrap_or_default()
}
