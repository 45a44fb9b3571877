//! Code-generation backends: a replaying mock and an HTTP chat client.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::json;
use thiserror::Error;

use super::prompt::Message;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("the mock backend has no response left (fixture has {0})")]
    Exhausted(usize),
    #[error("environment variable `{0}` with the API key is not set")]
    MissingKey(String),
    #[error("unexpected response: {0}")]
    Protocol(String),
    #[error("cannot read fixtures in {path}: {source}")]
    Fixture { path: PathBuf, source: std::io::Error },
}

impl BackendError {
    /// Whether retrying the same request could succeed.
    pub fn is_transient(&self) -> bool {
        matches!(self, BackendError::Transport(_))
    }
}

pub trait Backend: Send {
    fn complete(&mut self, messages: &[Message]) -> Result<String, BackendError>;
}

/// Replays fixture responses in order and records the conversations it saw.
#[derive(Debug, Clone, Default)]
pub struct MockBackend {
    responses: Vec<String>,
    next: usize,
    pub received: Vec<Vec<Message>>,
}

impl MockBackend {
    pub fn new(responses: Vec<String>) -> Self {
        MockBackend {
            responses,
            next: 0,
            received: Vec::new(),
        }
    }

    /// Loads every regular file of `dir`, ordered by file name.
    pub fn from_dir(dir: &Path) -> Result<Self, BackendError> {
        let err = |source| BackendError::Fixture {
            path: dir.to_path_buf(),
            source,
        };
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(err)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        let responses = files
            .iter()
            .map(std::fs::read_to_string)
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        Ok(MockBackend::new(responses))
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl Backend for MockBackend {
    fn complete(&mut self, messages: &[Message]) -> Result<String, BackendError> {
        self.received.push(messages.to_vec());
        let r = self
            .responses
            .get(self.next)
            .cloned()
            .ok_or(BackendError::Exhausted(self.responses.len()))?;
        self.next += 1;
        Ok(r)
    }
}

/// OpenAI-style chat-completions endpoint.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    /// Sent only when set; some models accept the default only.
    pub temperature: Option<f64>,
    pub timeout: Duration,
}

impl HttpBackend {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>, api_key_env: impl Into<String>) -> Self {
        HttpBackend {
            base_url: base_url.into(),
            model: model.into(),
            api_key_env: api_key_env.into(),
            temperature: None,
            timeout: Duration::from_secs(600),
        }
    }

    pub fn request_body(&self, messages: &[Message]) -> serde_json::Value {
        let mut body = json!({ "model": self.model, "messages": messages, "stream": false });
        if let Some(t) = self.temperature {
            body["temperature"] = json!(t);
        }
        body
    }
}

pub fn parse_chat_response(value: &serde_json::Value) -> Result<String, BackendError> {
    value
        .pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| BackendError::Protocol(format!("no choices[0].message.content in {value}")))
}

impl Backend for HttpBackend {
    fn complete(&mut self, messages: &[Message]) -> Result<String, BackendError> {
        let key = std::env::var(&self.api_key_env).map_err(|_| BackendError::MissingKey(self.api_key_env.clone()))?;
        let url = format!("{}/chat/completions", self.base_url.trim_end_matches('/'));
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut resp = agent
            .post(&url)
            .header("Authorization", &format!("Bearer {key}"))
            .send_json(self.request_body(messages))
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        if status == 429 || status >= 500 {
            return Err(BackendError::Transport(format!("HTTP {status}: {text}")));
        }
        if status >= 400 {
            return Err(BackendError::Protocol(format!("HTTP {status}: {text}")));
        }
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| BackendError::Protocol(e.to_string()))?;
        parse_chat_response(&value)
    }
}
