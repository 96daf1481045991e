//! Chat-completion backends: a real HTTP client speaking the
//! OpenAI-compatible wire format, and a deterministic scripted mock for
//! tests and offline runs.
//!
//! Every call consumes exactly one response. HTTP calls retry on transport
//! errors, 429s, and 5xx with exponential backoff; scripted calls pop a
//! FIFO queue and fail once it is empty. All traffic can be mirrored to an
//! append-only audit log with a monotonic call index.

use std::collections::VecDeque;
use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable holding the bearer token for HTTP backends.
pub const API_KEY_ENV: &str = "TUTORSIM_API_KEY";
/// Environment variable holding the default endpoint base URL.
pub const ENDPOINT_ENV: &str = "TUTORSIM_ENDPOINT";

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("scripted backend has no responses left")]
    BackendExhausted,
    #[error("transport failure after {attempts} attempt(s): {message}")]
    TransportError { attempts: u32, message: String },
    #[error("malformed backend response: {detail}")]
    MalformedResponse { detail: String },
    #[error("backend rejected the request (status {status}): {body}")]
    Api { status: u16, body: String },
    #[error("invalid chat request: {reason}")]
    InvalidRequest { reason: String },
    #[error("invalid generation parameters: {reason}")]
    InvalidParams { reason: String },
    #[error("audit log write failed: {0}")]
    Audit(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: ChatRole::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: ChatRole::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: ChatRole::Assistant, content: content.into() }
    }
}

/// Decoding settings for one call. The same struct is recorded in dialogue
/// metadata so a run can be re-issued with identical settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub model_name: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Per-request timeout, seconds.
    pub request_timeout: u64,
}

impl GenerationParams {
    pub fn new(
        model_name: impl Into<String>,
        temperature: f64,
        max_tokens: u32,
        request_timeout: u64,
    ) -> Result<Self, GatewayError> {
        let params = GenerationParams {
            model_name: model_name.into(),
            temperature,
            max_tokens,
            request_timeout,
        };
        params.validate()?;
        Ok(params)
    }

    /// Diverse sampling for the teacher/student role-play agents.
    pub fn role_play(model_name: impl Into<String>) -> Self {
        GenerationParams {
            model_name: model_name.into(),
            temperature: 0.7,
            max_tokens: 512,
            request_timeout: 120,
        }
    }

    /// Deterministic settings for validation judges.
    pub fn judge(model_name: impl Into<String>) -> Self {
        GenerationParams {
            model_name: model_name.into(),
            temperature: 0.0,
            max_tokens: 512,
            request_timeout: 120,
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(GatewayError::InvalidParams {
                reason: format!("temperature {} outside [0, 2]", self.temperature),
            });
        }
        if self.max_tokens < 1 {
            return Err(GatewayError::InvalidParams {
                reason: "max_tokens must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Wait/backoff schedule for HTTP retries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    /// Retries after the first attempt, so total attempts = max_retries + 1.
    pub max_retries: u32,
    pub base_delay_ms: u64,
    pub factor: f64,
    /// Additive jitter, up to half of the nominal delay.
    pub jitter: bool,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_retries: 3, base_delay_ms: 1000, factor: 2.0, jitter: true }
    }
}

impl RetryPolicy {
    /// Delay before retry number `attempt` (0-based). `jitter_unit` must be
    /// in [0, 1); it scales the additive jitter term and is injected so the
    /// schedule itself stays testable.
    pub fn delay(&self, attempt: u32, jitter_unit: f64) -> Duration {
        let nominal = self.base_delay_ms as f64 * self.factor.powi(attempt as i32);
        let jitter = if self.jitter { jitter_unit * nominal / 2.0 } else { 0.0 };
        Duration::from_millis((nominal + jitter) as u64)
    }
}

/// Append-only JSONL mirror of every backend call, with a monotonically
/// increasing `call_index` shared by all writers of one run.
pub struct AuditLog {
    writer: Mutex<Box<dyn Write + Send>>,
    counter: AtomicU64,
}

impl AuditLog {
    pub fn new(writer: Box<dyn Write + Send>) -> Self {
        AuditLog { writer: Mutex::new(writer), counter: AtomicU64::new(0) }
    }

    pub fn to_file(path: &std::path::Path) -> std::io::Result<Self> {
        let file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
        Ok(AuditLog::new(Box::new(file)))
    }

    /// Write one entry and return its call index.
    pub fn record(&self, kind: &str, detail: serde_json::Value) -> std::io::Result<u64> {
        let index = self.counter.fetch_add(1, Ordering::SeqCst);
        let line = serde_json::json!({
            "call_index": index,
            "at": chrono::Utc::now().to_rfc3339(),
            "kind": kind,
            "detail": detail,
        });
        let mut writer = self.writer.lock().expect("audit writer poisoned");
        writeln!(writer, "{line}")?;
        writer.flush()?;
        Ok(index)
    }
}

/// A deterministic FIFO of canned assistant replies.
pub struct ScriptedBackend {
    queue: Mutex<VecDeque<String>>,
}

impl ScriptedBackend {
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedBackend {
            queue: Mutex::new(responses.into_iter().map(Into::into).collect()),
        }
    }

    pub fn remaining(&self) -> usize {
        self.queue.lock().expect("scripted queue poisoned").len()
    }

    fn pop(&self) -> Result<String, GatewayError> {
        self.queue
            .lock()
            .expect("scripted queue poisoned")
            .pop_front()
            .ok_or(GatewayError::BackendExhausted)
    }
}

/// OpenAI-compatible chat endpoint reached over HTTP.
pub struct HttpBackend {
    endpoint: String,
    api_key: Option<String>,
    retry: RetryPolicy,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, retry: RetryPolicy) -> Self {
        HttpBackend {
            endpoint: endpoint.into(),
            api_key,
            retry,
            client: reqwest::blocking::Client::new(),
        }
    }

    /// Endpoint from `TUTORSIM_ENDPOINT`, key from `TUTORSIM_API_KEY`.
    pub fn from_env() -> Result<Self, GatewayError> {
        let endpoint = std::env::var(ENDPOINT_ENV).map_err(|_| GatewayError::InvalidRequest {
            reason: format!("{ENDPOINT_ENV} is not set"),
        })?;
        let api_key = std::env::var(API_KEY_ENV).ok();
        Ok(HttpBackend::new(endpoint, api_key, RetryPolicy::default()))
    }

    fn completions_url(&self) -> String {
        format!("{}/chat/completions", self.endpoint.trim_end_matches('/'))
    }

    fn post_once(
        &self,
        body: &serde_json::Value,
        timeout: Duration,
    ) -> Result<String, RetryDecision> {
        let mut request = self
            .client
            .post(self.completions_url())
            .timeout(timeout)
            .json(body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request
            .send()
            .map_err(|e| RetryDecision::Retryable(format!("transport: {e}")))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| RetryDecision::Retryable(format!("read body: {e}")))?;
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(RetryDecision::Retryable(format!("status {status}: {text}")));
        }
        if !status.is_success() {
            return Err(RetryDecision::Fatal(GatewayError::Api {
                status: status.as_u16(),
                body: text,
            }));
        }
        Ok(text)
    }
}

enum RetryDecision {
    Retryable(String),
    Fatal(GatewayError),
}

/// The two backend flavors behind one `chat` entry point.
pub enum Backend {
    Http(HttpBackend),
    Scripted(ScriptedBackend),
}

impl Backend {
    pub fn scripted<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Backend::Scripted(ScriptedBackend::new(responses))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Backend::Http(_) => "http",
            Backend::Scripted(_) => "scripted",
        }
    }

    /// Run one chat completion and return the assistant message.
    ///
    /// `audit`, when present, receives one entry per call (success or
    /// failure) tagged with the monotonic call index.
    pub fn chat(
        &self,
        messages: &[ChatMessage],
        params: &GenerationParams,
        audit: Option<&AuditLog>,
    ) -> Result<ChatMessage, GatewayError> {
        params.validate()?;
        if messages.is_empty() {
            return Err(GatewayError::InvalidRequest { reason: "no messages".into() });
        }
        if messages[0].role == ChatRole::Assistant {
            return Err(GatewayError::InvalidRequest {
                reason: "first message must be system or user".into(),
            });
        }

        let result = match self {
            Backend::Scripted(scripted) => scripted.pop().map(ChatMessage::assistant),
            Backend::Http(http) => http_chat(http, messages, params),
        };

        if let Some(log) = audit {
            let detail = serde_json::json!({
                "backend": self.kind_name(),
                "model": params.model_name,
                "request": {
                    "messages": messages,
                    "temperature": params.temperature,
                    "max_tokens": params.max_tokens,
                },
                "response": match &result {
                    Ok(message) => serde_json::json!({ "content": message.content }),
                    Err(error) => serde_json::json!({ "error": error.to_string() }),
                },
            });
            log.record("chat", detail)?;
        }
        result
    }
}

fn http_chat(
    http: &HttpBackend,
    messages: &[ChatMessage],
    params: &GenerationParams,
) -> Result<ChatMessage, GatewayError> {
    let body = serde_json::json!({
        "model": params.model_name,
        "messages": messages,
        "temperature": params.temperature,
        "max_tokens": params.max_tokens,
    });
    let timeout = Duration::from_secs(params.request_timeout);

    let mut attempts = 0u32;
    loop {
        attempts += 1;
        match http.post_once(&body, timeout) {
            Ok(text) => return parse_completion(&text),
            Err(RetryDecision::Fatal(error)) => return Err(error),
            Err(RetryDecision::Retryable(message)) => {
                if attempts > http.retry.max_retries {
                    return Err(GatewayError::TransportError { attempts, message });
                }
                let jitter_unit = rand::thread_rng().gen_range(0.0..1.0);
                std::thread::sleep(http.retry.delay(attempts - 1, jitter_unit));
            }
        }
    }
}

fn parse_completion(text: &str) -> Result<ChatMessage, GatewayError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| GatewayError::MalformedResponse {
            detail: format!("not JSON: {e}"),
        })?;
    let content = value
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("message"))
        .and_then(|m| m.get("content"))
        .and_then(|c| c.as_str())
        .ok_or_else(|| GatewayError::MalformedResponse {
            detail: "missing choices[0].message.content".into(),
        })?;
    Ok(ChatMessage::assistant(content))
}

/// Counting semaphore bounding how many judge calls run at once.
pub struct Gate {
    permits: Mutex<usize>,
    available: Condvar,
}

impl Gate {
    pub fn new(permits: usize) -> Self {
        assert!(permits > 0, "gate needs at least one permit");
        Gate { permits: Mutex::new(permits), available: Condvar::new() }
    }

    /// Block until a permit is free, then hold it for the guard's lifetime.
    pub fn acquire(&self) -> GatePermit<'_> {
        let mut permits = self.permits.lock().expect("gate poisoned");
        while *permits == 0 {
            permits = self.available.wait(permits).expect("gate poisoned");
        }
        *permits -= 1;
        GatePermit { gate: self }
    }
}

pub struct GatePermit<'a> {
    gate: &'a Gate,
}

impl Drop for GatePermit<'_> {
    fn drop(&mut self) {
        let mut permits = self.gate.permits.lock().expect("gate poisoned");
        *permits += 1;
        self.gate.available.notify_one();
    }
}
