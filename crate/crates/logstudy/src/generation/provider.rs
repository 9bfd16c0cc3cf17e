use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use serde_json::json;

use super::cache::PromptCache;
use super::prompt_hash;
use crate::source::parse;

/// One completion request. The prompt is the whole user message.
#[derive(Debug, Clone)]
pub struct ProviderRequest<'a> {
    pub model_id: &'a str,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub prompt: &'a str,
    pub timeout: Duration,
}

#[derive(Debug, Clone)]
pub struct ProviderReply {
    pub text: String,
    pub metadata: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone)]
pub struct ProviderFailure {
    /// HTTP status when the failure came from a response.
    pub status: Option<u16>,
    pub message: String,
    pub retryable: bool,
}

impl fmt::Display for ProviderFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.status {
            Some(code) => write!(f, "status {code}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

pub trait Provider: Sync {
    fn name(&self) -> &str;
    fn complete(&self, request: &ProviderRequest) -> Result<ProviderReply, ProviderFailure>;
}

/// Offline stand-in for a model: inserts `logging.info("enter <fn>")` at
/// the head of every function body and an import when needed, then wraps
/// the result in a fenced block the way chat models answer. Useful for
/// exercising the whole pipeline without network access.
#[derive(Debug, Default, Clone)]
pub struct MockLoggerProvider;

impl MockLoggerProvider {
    fn instrument(source: &str) -> String {
        let Ok(tree) = parse(source) else {
            return source.to_string();
        };
        let insertions = Self::insertions(&tree, source);
        if insertions.is_empty() {
            return source.to_string();
        }
        let mut out = source.to_string();
        for (pos, text) in insertions.into_iter().rev() {
            out.insert_str(pos, &text);
        }
        format!("import logging\n{out}")
    }

    /// (byte offset, text) insertion points, ascending.
    fn insertions(tree: &tree_sitter::Tree, source: &str) -> Vec<(usize, String)> {
        let bytes = source.as_bytes();
        let mut out = Vec::new();
        let mut stack = vec![tree.root_node()];
        while let Some(node) = stack.pop() {
            let mut cursor = node.walk();
            let children: Vec<_> = node.children(&mut cursor).collect();
            drop(cursor);
            for child in children.into_iter().rev() {
                stack.push(child);
            }
            if node.kind() != "function_definition" {
                continue;
            }
            let (Some(name), Some(body)) =
                (node.child_by_field_name("name"), node.child_by_field_name("body"))
            else {
                continue;
            };
            let Some(first) = body.named_child(0) else { continue };
            let name = &source[name.byte_range()];
            let start = first.start_byte();
            let line_start = bytes[..start]
                .iter()
                .rposition(|&b| b == b'\n')
                .map_or(0, |i| i + 1);
            let prefix = &source[line_start..start];
            if prefix.bytes().all(|b| b == b' ' || b == b'\t') {
                out.push((start, format!("logging.info(\"enter {name}\")\n{prefix}")));
            } else {
                // Inline suite: `def f(): return 1`.
                out.push((start, format!("logging.info(\"enter {name}\"); ")));
            }
        }
        out.sort_by_key(|&(pos, _)| pos);
        out
    }
}

impl Provider for MockLoggerProvider {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, request: &ProviderRequest) -> Result<ProviderReply, ProviderFailure> {
        let code = request
            .prompt
            .rsplit("This is the file:\n")
            .next()
            .unwrap_or(request.prompt);
        let text = format!("```python\n{}\n```", Self::instrument(code));
        Ok(ProviderReply { text, metadata: BTreeMap::new() })
    }
}

/// Replays responses from a directory in the prompt cache layout. A miss
/// is a non-retryable failure so offline reruns fail loudly instead of
/// silently regenerating.
#[derive(Debug, Clone)]
pub struct ReplayProvider {
    cache: PromptCache,
}

impl ReplayProvider {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReplayProvider { cache: PromptCache::new(dir) }
    }
}

impl Provider for ReplayProvider {
    fn name(&self) -> &str {
        "replay"
    }

    fn complete(&self, request: &ProviderRequest) -> Result<ProviderReply, ProviderFailure> {
        let hash = prompt_hash(request.model_id, request.prompt);
        match self.cache.get(&hash) {
            Ok(Some(entry)) => Ok(ProviderReply {
                text: entry.response_text,
                metadata: BTreeMap::from([("replayed".into(), json!(true))]),
            }),
            Ok(None) => Err(ProviderFailure {
                status: None,
                message: format!("no replay entry for prompt {hash}"),
                retryable: false,
            }),
            Err(e) => Err(ProviderFailure {
                status: None,
                message: format!("replay read failed: {e}"),
                retryable: false,
            }),
        }
    }
}

/// OpenAI-compatible chat completions client. Reads the key and endpoint
/// from the environment so credentials stay out of run configs.
pub struct HttpChatProvider {
    agent: ureq::Agent,
    endpoint: String,
    api_key: Option<String>,
}

impl HttpChatProvider {
    pub const ENDPOINT_VAR: &'static str = "LOGSTUDY_API_BASE";
    pub const API_KEY_VAR: &'static str = "LOGSTUDY_API_KEY";

    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build();
        HttpChatProvider {
            agent: config.into(),
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            api_key,
        }
    }

    /// Endpoint from `LOGSTUDY_API_BASE`, key from `LOGSTUDY_API_KEY`.
    pub fn from_env(timeout: Duration) -> Result<Self, ProviderFailure> {
        let endpoint = std::env::var(Self::ENDPOINT_VAR).map_err(|_| ProviderFailure {
            status: None,
            message: format!("{} is not set", Self::ENDPOINT_VAR),
            retryable: false,
        })?;
        Ok(Self::new(endpoint, std::env::var(Self::API_KEY_VAR).ok(), timeout))
    }
}

impl Provider for HttpChatProvider {
    fn name(&self) -> &str {
        "http"
    }

    fn complete(&self, request: &ProviderRequest) -> Result<ProviderReply, ProviderFailure> {
        let url = format!("{}/chat/completions", self.endpoint);
        let body = json!({
            "model": request.model_id,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
            "messages": [{ "role": "user", "content": request.prompt }],
        });
        let mut builder = self.agent.post(&url);
        if let Some(key) = &self.api_key {
            builder = builder.header("authorization", &format!("Bearer {key}"));
        }
        let mut response = builder.send_json(&body).map_err(transport_failure)?;
        let status = response.status().as_u16();
        let payload: serde_json::Value =
            response.body_mut().read_json().map_err(transport_failure)?;
        if !(200..300).contains(&status) {
            let message = payload
                .pointer("/error/message")
                .and_then(|v| v.as_str())
                .unwrap_or("request failed")
                .to_string();
            return Err(ProviderFailure {
                status: Some(status),
                message,
                retryable: status == 429 || status >= 500,
            });
        }
        let text = payload
            .pointer("/choices/0/message/content")
            .and_then(|v| v.as_str())
            .ok_or_else(|| ProviderFailure {
                status: Some(status),
                message: "response carries no message content".into(),
                retryable: false,
            })?
            .to_string();
        let mut metadata = BTreeMap::new();
        if let Some(usage) = payload.get("usage") {
            metadata.insert("usage".to_string(), usage.clone());
        }
        Ok(ProviderReply { text, metadata })
    }
}

fn transport_failure(error: ureq::Error) -> ProviderFailure {
    let retryable = matches!(
        error,
        ureq::Error::Io(_)
            | ureq::Error::Timeout(_)
            | ureq::Error::ConnectionFailed
            | ureq::Error::HostNotFound
    );
    ProviderFailure { status: None, message: error.to_string(), retryable }
}
