//! Clients for the chat model, the open-vocabulary detector and the
//! captioner, in live, replay, record and scripted modes.

mod fingerprint;
mod fixture;
mod live;
mod scripted;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::scene::{BoundingBox, Detection};

pub use fingerprint::{canonical_json, fingerprint, fingerprint_value, Fingerprint};
pub use fixture::{Fixture, RecordBackend, ReplayBackend};
pub use live::{HttpTransport, LiveBackend, Transport};
pub use scripted::{Call, Script, ScriptedBackend};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("no {kind} fixture for request {key}")]
    FixtureMiss { kind: RequestKind, key: String },
    #[error("credential variable `{0}` is not set")]
    CredentialMissing(String),
    #[error("scripted {0} queue is exhausted")]
    QueueExhausted(RequestKind),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid backend configuration: {0}")]
    InvalidConfig(String),
    #[error("fixture store: {0}")]
    Store(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RequestKind {
    Chat,
    Detect,
    Caption,
}

impl std::fmt::Display for RequestKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RequestKind::Chat => "chat",
            RequestKind::Detect => "detect",
            RequestKind::Caption => "caption",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Message { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Message { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Message { role: Role::Assistant, content: content.into() }
    }
}

pub const DEFAULT_TEMPERATURE: f64 = 0.0;
pub const DEFAULT_MAX_TOKENS: u32 = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ChatRequest {
    pub fn new(messages: Vec<Message>) -> Self {
        ChatRequest {
            messages,
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }

    pub fn check(&self) -> Result<(), BackendError> {
        match self.messages.last() {
            None => Err(BackendError::InvalidRequest("chat request has no messages".into())),
            Some(m) if m.role != Role::User => {
                Err(BackendError::InvalidRequest("last chat message must come from the user".into()))
            }
            _ if self.temperature.is_nan() || self.temperature < 0.0 => {
                Err(BackendError::InvalidRequest("temperature must be non-negative".into()))
            }
            _ => Ok(()),
        }
    }

    /// The final user message, which carries the task.
    pub fn prompt(&self) -> &str {
        self.messages.last().map_or("", |m| m.content.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRequest {
    pub image: String,
    pub query: String,
}

impl DetectionRequest {
    pub fn check(&self) -> Result<(), BackendError> {
        if self.query.trim().is_empty() {
            return Err(BackendError::InvalidRequest("detection query is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptionRequest {
    pub image: String,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub prompt: String,
}

impl CaptionRequest {
    pub fn check(&self) -> Result<(), BackendError> {
        if self.prompt.contains("{{") {
            return Err(BackendError::InvalidRequest("caption prompt has an unfilled placeholder".into()));
        }
        Ok(())
    }
}

/// Uniform access to the three external models.
pub trait Backend: Send + Sync {
    fn chat(&self, req: &ChatRequest) -> Result<ChatResponse, BackendError>;
    fn detect(&self, req: &DetectionRequest) -> Result<Vec<Detection>, BackendError>;
    fn caption(&self, req: &CaptionRequest) -> Result<String, BackendError>;
}

impl<B: Backend + ?Sized> Backend for Arc<B> {
    fn chat(&self, req: &ChatRequest) -> Result<ChatResponse, BackendError> {
        (**self).chat(req)
    }
    fn detect(&self, req: &DetectionRequest) -> Result<Vec<Detection>, BackendError> {
        (**self).detect(req)
    }
    fn caption(&self, req: &CaptionRequest) -> Result<String, BackendError> {
        (**self).caption(req)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendMode {
    Live,
    #[default]
    Replay,
    Record,
    Scripted,
}

impl std::str::FromStr for BackendMode {
    type Err = BackendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(BackendMode::Live),
            "replay" => Ok(BackendMode::Replay),
            "record" => Ok(BackendMode::Record),
            "scripted" => Ok(BackendMode::Scripted),
            other => Err(BackendError::InvalidConfig(format!("unknown backend mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub mode: BackendMode,
    pub endpoint: Option<String>,
    /// Name of the environment variable holding the bearer token.
    pub auth_env: Option<String>,
    /// Model identifier sent with chat requests, if the service wants one.
    pub model: Option<String>,
    pub fixture_dir: Option<PathBuf>,
    /// Script file for scripted mode.
    pub script: Option<PathBuf>,
    #[serde(with = "crate::planner::duration_ms", rename = "request_timeout_ms")]
    pub request_timeout: Duration,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            mode: BackendMode::Replay,
            endpoint: None,
            auth_env: None,
            model: None,
            fixture_dir: None,
            script: None,
            request_timeout: Duration::from_secs(60),
        }
    }
}

impl BackendConfig {
    pub fn check(&self) -> Result<(), BackendError> {
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(BackendError::InvalidConfig(format!("{} mode requires {what}", mode_name(self.mode))))
            }
        };
        match self.mode {
            BackendMode::Live => need(self.endpoint.is_some(), "an endpoint"),
            BackendMode::Replay => need(self.fixture_dir.is_some(), "a fixture directory"),
            BackendMode::Record => {
                need(self.endpoint.is_some(), "an endpoint")?;
                need(self.fixture_dir.is_some(), "a fixture directory")
            }
            BackendMode::Scripted => need(self.script.is_some(), "a script file"),
        }
    }
}

fn mode_name(m: BackendMode) -> &'static str {
    match m {
        BackendMode::Live => "live",
        BackendMode::Replay => "replay",
        BackendMode::Record => "record",
        BackendMode::Scripted => "scripted",
    }
}

/// Builds the backend for `config`. Only live and record modes touch `transport`.
pub fn build_backend(
    config: &BackendConfig,
    transport: Arc<dyn Transport>,
) -> Result<Arc<dyn Backend>, BackendError> {
    config.check()?;
    Ok(match config.mode {
        BackendMode::Live => Arc::new(LiveBackend::new(config.clone(), transport)),
        BackendMode::Replay => Arc::new(ReplayBackend::new(config.fixture_dir.clone().expect("checked"))),
        BackendMode::Record => Arc::new(RecordBackend::new(
            Arc::new(LiveBackend::new(config.clone(), transport)),
            config.fixture_dir.clone().expect("checked"),
        )),
        BackendMode::Scripted => {
            let path = config.script.as_ref().expect("checked");
            let text = std::fs::read_to_string(path)
                .map_err(|e| BackendError::InvalidConfig(format!("{}: {e}", path.display())))?;
            let script: Script = serde_json::from_str(&text)
                .map_err(|e| BackendError::InvalidConfig(format!("{}: {e}", path.display())))?;
            Arc::new(ScriptedBackend::new(script))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chat_request_checks() {
        assert!(ChatRequest::new(vec![]).check().is_err());
        assert!(ChatRequest::new(vec![Message::user("hi"), Message::assistant("yo")]).check().is_err());
        let mut ok = ChatRequest::new(vec![Message::system("s"), Message::user("hi")]);
        assert!(ok.check().is_ok());
        ok.temperature = -0.5;
        assert!(ok.check().is_err());
    }

    #[test]
    fn config_requirements() {
        let mut c = BackendConfig::default();
        assert!(c.check().is_err());
        c.fixture_dir = Some("fx".into());
        assert!(c.check().is_ok());
        c.mode = BackendMode::Record;
        assert!(c.check().is_err());
        c.endpoint = Some("http://localhost:1".into());
        assert!(c.check().is_ok());
        c.mode = BackendMode::Live;
        c.fixture_dir = None;
        assert!(c.check().is_ok());
    }

    #[test]
    fn mode_parses() {
        assert_eq!("record".parse::<BackendMode>().unwrap(), BackendMode::Record);
        assert!("offline".parse::<BackendMode>().is_err());
    }

    #[test]
    fn caption_prompt_must_be_filled() {
        let mut r = CaptionRequest {
            image: "i.png".into(),
            bbox: BoundingBox::new(0.0, 0.0, 1.0, 1.0),
            prompt: "Q: what does this {{object}} describe? A: ".into(),
        };
        assert!(r.check().is_err());
        r.prompt = "Q: what does this carrot describe? A: ".into();
        assert!(r.check().is_ok());
    }
}
