// SPDX-License-Identifier: Apache-2.0

//! Language-model backends.

use std::collections::VecDeque;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub temperature: f64,
    #[serde(default)]
    pub max_tokens: Option<u32>,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            temperature: 0.2,
            max_tokens: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LmError {
    /// Worth retrying.
    #[error("transport: {0}")]
    Transport(String),
    /// Not worth retrying.
    #[error("{0}")]
    Fatal(String),
}

/// One prompt in, one completion out.
pub trait LmBackend: Send + Sync {
    fn complete(&self, prompt: &str, params: &GenParams) -> Result<String, LmError>;
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum StubEntry {
    Text(String),
    Fail { fail: String },
}

#[derive(Debug, Deserialize)]
struct StubFile {
    responses: Vec<StubEntry>,
}

/// Replays canned responses in order. `{"fail": "..."}` entries produce a
/// transport error. Running out of responses is a fatal error.
#[derive(Debug)]
pub struct StubBackend {
    queue: Mutex<VecDeque<StubEntry>>,
    prompts: Mutex<Vec<String>>,
}

impl StubBackend {
    pub fn new(responses: impl IntoIterator<Item = String>) -> Self {
        Self::from_entries(responses.into_iter().map(StubEntry::Text).collect())
    }

    fn from_entries(entries: Vec<StubEntry>) -> Self {
        StubBackend {
            queue: Mutex::new(entries.into()),
            prompts: Mutex::new(Vec::new()),
        }
    }

    /// Parses `{"responses": [text | {"fail": message}, ...]}`.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let f: StubFile = serde_json::from_str(text)?;
        Ok(Self::from_entries(f.responses))
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// A transport failure followed by nothing else.
    pub fn failing(message: &str, times: usize) -> Self {
        Self::from_entries(
            (0..times)
                .map(|_| StubEntry::Fail {
                    fail: message.to_string(),
                })
                .collect(),
        )
    }

    /// Every prompt received so far.
    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().expect("stub lock").clone()
    }

    pub fn remaining(&self) -> usize {
        self.queue.lock().expect("stub lock").len()
    }
}

impl LmBackend for StubBackend {
    fn complete(&self, prompt: &str, _params: &GenParams) -> Result<String, LmError> {
        self.prompts.lock().expect("stub lock").push(prompt.to_string());
        match self.queue.lock().expect("stub lock").pop_front() {
            Some(StubEntry::Text(t)) => Ok(t),
            Some(StubEntry::Fail { fail }) => Err(LmError::Transport(fail)),
            None => Err(LmError::Fatal("stub backend has no responses left".into())),
        }
    }
}

/// OpenAI-compatible chat-completions endpoint.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub token_env: String,
    pub timeout: Duration,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, token_env: impl Into<String>) -> Self {
        HttpBackend {
            endpoint: endpoint.into(),
            model: model.into(),
            token_env: token_env.into(),
            timeout: Duration::from_secs(120),
        }
    }
}

impl LmBackend for HttpBackend {
    fn complete(&self, prompt: &str, params: &GenParams) -> Result<String, LmError> {
        let token = std::env::var(&self.token_env)
            .map_err(|_| LmError::Fatal(format!("environment variable {} is not set", self.token_env)))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(self.timeout)
            .build()
            .map_err(|e| LmError::Fatal(e.to_string()))?;
        let mut body = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
        });
        if let Some(m) = params.max_tokens {
            body["max_tokens"] = m.into();
        }
        let resp = client
            .post(&self.endpoint)
            .bearer_auth(token)
            .json(&body)
            .send()
            .map_err(|e| LmError::Transport(e.to_string()))?;
        let status = resp.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(LmError::Transport(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(LmError::Fatal(format!("HTTP {status}")));
        }
        let value: serde_json::Value = resp.json().map_err(|e| LmError::Transport(e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| LmError::Fatal("response has no completion text".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("language model failed after {retries} attempt(s): {message}")]
pub struct BackendError {
    pub retries: u32,
    pub message: String,
}

/// Retry policy for transport errors: `attempts` tries with exponential
/// backoff starting at `backoff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Retry {
    pub attempts: u32,
    pub backoff: Duration,
}

impl Default for Retry {
    fn default() -> Self {
        Retry {
            attempts: 3,
            backoff: Duration::from_millis(500),
        }
    }
}

impl Retry {
    pub fn complete(&self, lm: &dyn LmBackend, prompt: &str, params: &GenParams) -> Result<String, BackendError> {
        let mut last = String::new();
        for attempt in 1..=self.attempts {
            match lm.complete(prompt, params) {
                Ok(text) => return Ok(text),
                Err(LmError::Fatal(m)) => {
                    return Err(BackendError {
                        retries: attempt,
                        message: m,
                    })
                }
                Err(LmError::Transport(m)) => {
                    log::warn!("language model attempt {attempt}/{} failed: {m}", self.attempts);
                    last = m;
                    if attempt < self.attempts {
                        std::thread::sleep(self.backoff * 2u32.pow(attempt - 1));
                    }
                }
            }
        }
        Err(BackendError {
            retries: self.attempts,
            message: last,
        })
    }
}
