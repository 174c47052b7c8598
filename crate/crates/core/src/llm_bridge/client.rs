use std::env;
use std::thread;
use std::time::Duration;

use rand::Rng;
use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use tracing::{debug, warn};

use super::{LlmError, RenderedPrompt};

pub const ENV_ENDPOINT: &str = "CM_LLM_ENDPOINT";
pub const ENV_TOKEN_VAR: &str = "CM_LLM_TOKEN_VAR";
pub const ENV_TIMEOUT: &str = "CM_LLM_TIMEOUT_S";

/// Where and how to send a prompt. Holds the *name* of the environment
/// variable with the bearer token, never the token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompletionConfig {
    pub endpoint: String,
    pub token_env: Option<String>,
    pub timeout_secs: u64,
    pub max_retries: u32,
    /// Request body field that carries the prompt.
    pub prompt_field: String,
    /// Dotted path to the completion text in the JSON response, e.g.
    /// `choices.0.message.content`.
    pub response_path: String,
    /// First retry delay; doubles per attempt.
    pub backoff_ms: u64,
    /// Extra top-level fields merged into every request body.
    pub extra_body: Map<String, Value>,
}

impl Default for CompletionConfig {
    fn default() -> Self {
        CompletionConfig {
            endpoint: String::new(),
            token_env: None,
            timeout_secs: 60,
            max_retries: 2,
            prompt_field: "prompt".into(),
            response_path: "text".into(),
            backoff_ms: 500,
            extra_body: Map::new(),
        }
    }
}

impl CompletionConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        CompletionConfig {
            endpoint: endpoint.into(),
            ..Self::default()
        }
    }

    /// Reads `CM_LLM_ENDPOINT`, `CM_LLM_TOKEN_VAR` and `CM_LLM_TIMEOUT_S`.
    pub fn from_env() -> Result<Self, LlmError> {
        let endpoint = env::var(ENV_ENDPOINT).map_err(|_| LlmError::Config(format!("{ENV_ENDPOINT} is not set")))?;
        let mut config = Self::new(endpoint);
        config.token_env = env::var(ENV_TOKEN_VAR).ok().filter(|v| !v.is_empty());
        if let Ok(t) = env::var(ENV_TIMEOUT) {
            config.timeout_secs = t
                .trim()
                .parse()
                .map_err(|_| LlmError::Config(format!("{ENV_TIMEOUT}={t:?} is not a whole number of seconds")))?;
        }
        config.check()?;
        Ok(config)
    }

    pub fn check(&self) -> Result<(), LlmError> {
        if self.endpoint.trim().is_empty() {
            return Err(LlmError::Config("endpoint is empty".into()));
        }
        if self.timeout_secs == 0 {
            return Err(LlmError::Config("timeout must be positive".into()));
        }
        if self.prompt_field.is_empty() || self.response_path.is_empty() {
            return Err(LlmError::Config("prompt field and response path must be set".into()));
        }
        Ok(())
    }
}

/// Follows a dotted path through objects and (by numeric segment) arrays.
pub fn extract_text<'a>(value: &'a Value, path: &str) -> Option<&'a str> {
    path.split('.')
        .try_fold(value, |v, seg| match v {
            Value::Object(map) => map.get(seg),
            Value::Array(items) => seg.parse::<usize>().ok().and_then(|i| items.get(i)),
            _ => None,
        })?
        .as_str()
}

enum Attempt {
    Done(String),
    Retry(LlmError),
    Fatal(LlmError),
}

/// Sends `prompt` and returns the completion text. Server errors, 429,
/// timeouts and connection failures are retried up to `max_retries` times
/// with exponential backoff and jitter.
pub fn submit(config: &CompletionConfig, prompt: &RenderedPrompt) -> Result<String, LlmError> {
    config.check()?;
    let token = match &config.token_env {
        Some(var) => Some(env::var(var).map_err(|_| LlmError::MissingCredentials(var.clone()))?),
        None => None,
    };
    let client = Client::builder()
        .timeout(Duration::from_secs(config.timeout_secs))
        .build()
        .map_err(|e| LlmError::Transport(e.to_string()))?;

    let mut body = config.extra_body.clone();
    body.insert(config.prompt_field.clone(), Value::String(prompt.text.clone()));
    let body = Value::Object(body);

    let mut attempt = 0u32;
    loop {
        attempt += 1;
        debug!(endpoint = %config.endpoint, attempt, kind = prompt.kind.as_str(), "sending prompt");
        let outcome = send_once(&client, config, token.as_deref(), &body);
        let err = match outcome {
            Attempt::Done(text) => return Ok(text),
            Attempt::Fatal(e) => return Err(e),
            Attempt::Retry(e) => e,
        };
        if attempt > config.max_retries {
            return Err(err);
        }
        let base = config.backoff_ms.saturating_mul(1u64 << (attempt - 1).min(16));
        let jitter = rand::rng().random_range(0..=base / 2);
        warn!(attempt, error = %err, delay_ms = base + jitter, "retrying");
        thread::sleep(Duration::from_millis(base + jitter));
    }
}

fn send_once(client: &Client, config: &CompletionConfig, token: Option<&str>, body: &Value) -> Attempt {
    let mut req = client.post(&config.endpoint).json(body);
    if let Some(t) = token {
        req = req.bearer_auth(t);
    }
    let resp = match req.send() {
        Ok(r) => r,
        Err(e) if e.is_timeout() => return Attempt::Retry(LlmError::Timeout(config.timeout_secs)),
        Err(e) if e.is_connect() || e.is_request() => return Attempt::Retry(LlmError::Transport(describe(e))),
        Err(e) => return Attempt::Fatal(LlmError::Transport(describe(e))),
    };
    let status = resp.status();
    if !status.is_success() {
        let err = LlmError::NonSuccessStatus(status.as_u16());
        return if status.is_server_error() || status == StatusCode::TOO_MANY_REQUESTS {
            Attempt::Retry(err)
        } else {
            Attempt::Fatal(err)
        };
    }
    let value: Value = match resp.json() {
        Ok(v) => v,
        Err(e) if e.is_timeout() => return Attempt::Retry(LlmError::Timeout(config.timeout_secs)),
        Err(e) => return Attempt::Fatal(LlmError::Extraction(format!("response is not JSON: {e}"))),
    };
    match extract_text(&value, &config.response_path) {
        Some(text) => Attempt::Done(text.to_owned()),
        None => Attempt::Fatal(LlmError::Extraction(format!(
            "no text at {:?} in response",
            config.response_path
        ))),
    }
}

/// Error text without the request URL, whose query string may carry keys.
fn describe(e: reqwest::Error) -> String {
    e.without_url().to_string()
}
