use std::sync::Arc;
use std::time::Duration;

use serde_json::{json, Value};

use crate::scene::Detection;

use super::{
    Backend, BackendConfig, BackendError, CaptionRequest, ChatRequest, ChatResponse,
    DetectionRequest,
};

/// JSON-over-HTTP POST. Swappable so tests never reach the network.
pub trait Transport: Send + Sync {
    fn post(
        &self,
        url: &str,
        bearer: &str,
        body: &Value,
        timeout: Duration,
    ) -> Result<Value, BackendError>;
}

#[derive(Debug, Default)]
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Transport for HttpTransport {
    fn post(&self, url: &str, bearer: &str, body: &Value, timeout: Duration) -> Result<Value, BackendError> {
        let unavailable = |e: reqwest::Error| BackendError::BackendUnavailable(format!("{url}: {e}"));
        let resp = self
            .client
            .post(url)
            .bearer_auth(bearer)
            .timeout(timeout)
            .json(body)
            .send()
            .map_err(unavailable)?;
        let status = resp.status();
        if !status.is_success() {
            return Err(BackendError::BackendUnavailable(format!("{url}: HTTP {status}")));
        }
        resp.json().map_err(unavailable)
    }
}

/// Talks to a model server over HTTP.
///
/// Chat uses `POST {endpoint}/chat/completions` with a messages array and
/// reads `choices[0].message.content`; detection posts `{image, query}` to
/// `/detect` and reads `detections`; captioning posts `{image, box, prompt}`
/// to `/caption` and reads `text`.
pub struct LiveBackend {
    config: BackendConfig,
    transport: Arc<dyn Transport>,
}

impl LiveBackend {
    pub fn new(config: BackendConfig, transport: Arc<dyn Transport>) -> Self {
        LiveBackend { config, transport }
    }

    fn token(&self) -> Result<String, BackendError> {
        let var = self
            .config
            .auth_env
            .as_deref()
            .ok_or_else(|| BackendError::InvalidConfig("live mode requires auth_env".into()))?;
        match std::env::var(var) {
            Ok(t) if !t.is_empty() => Ok(t),
            _ => Err(BackendError::CredentialMissing(var.to_string())),
        }
    }

    fn call(&self, path: &str, body: Value) -> Result<Value, BackendError> {
        let token = self.token()?;
        let endpoint = self
            .config
            .endpoint
            .as_deref()
            .ok_or_else(|| BackendError::InvalidConfig("live mode requires an endpoint".into()))?;
        let url = format!("{}/{path}", endpoint.trim_end_matches('/'));
        self.transport.post(&url, &token, &body, self.config.request_timeout)
    }
}

fn malformed(what: &str) -> BackendError {
    BackendError::BackendUnavailable(format!("malformed {what} response"))
}

impl Backend for LiveBackend {
    fn chat(&self, req: &ChatRequest) -> Result<ChatResponse, BackendError> {
        req.check()?;
        let mut body = json!({
            "messages": req.messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        });
        if let Some(model) = &self.config.model {
            body["model"] = json!(model);
        }
        let resp = self.call("chat/completions", body)?;
        let text = resp
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| malformed("chat"))?;
        Ok(ChatResponse { text: text.to_string() })
    }

    fn detect(&self, req: &DetectionRequest) -> Result<Vec<Detection>, BackendError> {
        req.check()?;
        let resp = self.call("detect", json!({"image": req.image, "query": req.query}))?;
        let dets = resp.get("detections").cloned().ok_or_else(|| malformed("detect"))?;
        serde_json::from_value(dets).map_err(|_| malformed("detect"))
    }

    fn caption(&self, req: &CaptionRequest) -> Result<String, BackendError> {
        req.check()?;
        let resp = self.call("caption", json!({"image": req.image, "box": req.bbox, "prompt": req.prompt}))?;
        resp.get("text")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| malformed("caption"))
    }
}
