//! HTTP backend for chat-completion style model endpoints.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::backend::{BackendError, Capabilities, RequestKind, ScorerBackend, ScorerRequest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteConfig {
    /// Full URL of the chat completions endpoint.
    pub endpoint: String,
    pub api_key: Option<String>,
    pub model: String,
    /// Endpoint answering `{"text", "image_url"}` with `{"similarity"}`.
    /// Without it the image channel is unavailable.
    pub embedding_endpoint: Option<String>,
    pub timeout_secs: u64,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            api_key: None,
            model: "gpt-4o".into(),
            embedding_endpoint: None,
            timeout_secs: 60,
        }
    }
}

pub struct RemoteBackend {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| BackendError::Unavailable(e.to_string()))?;
        Ok(Self { config, client })
    }

    fn post(&self, url: &str, body: &Value) -> Result<Value, BackendError> {
        let mut req = self.client.post(url).json(body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| BackendError::Unavailable(e.to_string()))?;
        let status = resp.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(BackendError::Unavailable(format!("{url} answered {status}")));
        }
        if !status.is_success() {
            return Err(BackendError::Rejected(format!("{url} answered {status}")));
        }
        resp.json::<Value>()
            .map_err(|e| BackendError::Unavailable(format!("unreadable response body: {e}")))
    }

    fn chat(&self, prompt: &str) -> Result<String, BackendError> {
        let body = json!({
            "model": self.config.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": prompt}],
        });
        let value = self.post(&self.config.endpoint, &body)?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| BackendError::Rejected("response has no choices[0].message.content".into()))
    }
}

impl ScorerBackend for RemoteBackend {
    fn capabilities(&self) -> Capabilities {
        Capabilities { image_embedding: self.config.embedding_endpoint.is_some(), ..Capabilities::ALL }
    }

    fn complete(&self, request: &ScorerRequest<'_>) -> Result<String, BackendError> {
        match *request {
            ScorerRequest::ImageSimilarity { task, source } => {
                let Some(url) = &self.config.embedding_endpoint else {
                    return Err(BackendError::Unsupported(RequestKind::ImageSimilarity));
                };
                let value = self.post(url, &json!({"text": task, "image_url": source}))?;
                value["similarity"]
                    .as_f64()
                    .map(|s| s.to_string())
                    .ok_or_else(|| BackendError::Rejected("response has no numeric similarity".into()))
            }
            _ => self.chat(&request.prompt()),
        }
    }
}
