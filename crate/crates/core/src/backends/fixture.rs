//! One JSON file per request fingerprint: `<dir>/<key>.json` holding the
//! canonical request, the response and a timestamp.

use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::scene::Detection;

use super::fingerprint::{fingerprint_value, request_value, Keyed};
use super::{
    Backend, BackendError, CaptionRequest, ChatRequest, ChatResponse, DetectionRequest,
    RequestKind,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub request: Value,
    pub response: Value,
    pub recorded_at: String,
}

fn fixture_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.json"))
}

#[derive(Debug, Deserialize)]
struct TextResponse {
    text: String,
}

#[derive(Debug, Deserialize)]
struct DetectResponse {
    detections: Vec<Detection>,
}

/// Serves stored responses; never touches the network.
#[derive(Debug, Clone)]
pub struct ReplayBackend {
    dir: PathBuf,
}

impl ReplayBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReplayBackend { dir: dir.into() }
    }

    fn lookup<T: Keyed, R: DeserializeOwned>(&self, req: &T) -> Result<R, BackendError> {
        let key = fingerprint_value(&request_value(T::KIND, req));
        let path = fixture_path(&self.dir, &key);
        let text = std::fs::read_to_string(&path).map_err(|_| BackendError::FixtureMiss {
            kind: T::KIND,
            key: key.clone(),
        })?;
        let fixture: Fixture = serde_json::from_str(&text)
            .map_err(|e| BackendError::Store(format!("{}: {e}", path.display())))?;
        serde_json::from_value(fixture.response)
            .map_err(|e| BackendError::Store(format!("{}: {e}", path.display())))
    }
}

impl Backend for ReplayBackend {
    fn chat(&self, req: &ChatRequest) -> Result<ChatResponse, BackendError> {
        req.check()?;
        let r: TextResponse = self.lookup(req)?;
        Ok(ChatResponse { text: r.text })
    }

    fn detect(&self, req: &DetectionRequest) -> Result<Vec<Detection>, BackendError> {
        req.check()?;
        let r: DetectResponse = self.lookup(req)?;
        Ok(r.detections)
    }

    fn caption(&self, req: &CaptionRequest) -> Result<String, BackendError> {
        req.check()?;
        let r: TextResponse = self.lookup(req)?;
        Ok(r.text)
    }
}

/// Forwards to an inner backend and stores every response as a fixture.
pub struct RecordBackend {
    inner: Arc<dyn Backend>,
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl RecordBackend {
    pub fn new(inner: Arc<dyn Backend>, dir: impl Into<PathBuf>) -> Self {
        RecordBackend {
            inner,
            dir: dir.into(),
            write_lock: Mutex::new(()),
        }
    }

    fn store(&self, kind: RequestKind, request: Value, response: Value) -> Result<(), BackendError> {
        let key = fingerprint_value(&request);
        let fixture = Fixture {
            request,
            response,
            recorded_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        };
        let text = serde_json::to_string_pretty(&fixture).expect("fixtures serialize") + "\n";
        let err = |e: std::io::Error| BackendError::Store(format!("{kind} fixture {key}: {e}"));
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        std::fs::create_dir_all(&self.dir).map_err(err)?;
        let path = fixture_path(&self.dir, &key);
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, text).map_err(err)?;
        std::fs::rename(&tmp, &path).map_err(err)?;
        log::debug!("recorded {kind} fixture {key}");
        Ok(())
    }
}

impl Backend for RecordBackend {
    fn chat(&self, req: &ChatRequest) -> Result<ChatResponse, BackendError> {
        let resp = self.inner.chat(req)?;
        self.store(RequestKind::Chat, request_value(RequestKind::Chat, req), json!({"text": resp.text}))?;
        Ok(resp)
    }

    fn detect(&self, req: &DetectionRequest) -> Result<Vec<Detection>, BackendError> {
        let dets = self.inner.detect(req)?;
        self.store(
            RequestKind::Detect,
            request_value(RequestKind::Detect, req),
            json!({"detections": dets}),
        )?;
        Ok(dets)
    }

    fn caption(&self, req: &CaptionRequest) -> Result<String, BackendError> {
        let text = self.inner.caption(req)?;
        self.store(RequestKind::Caption, request_value(RequestKind::Caption, req), json!({"text": text}))?;
        Ok(text)
    }
}
