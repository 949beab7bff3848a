use std::collections::VecDeque;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::scene::Detection;

use super::{
    Backend, BackendError, CaptionRequest, ChatRequest, ChatResponse, DetectionRequest,
    RequestKind,
};

/// Queued responses per request kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Script {
    pub chat: Vec<String>,
    pub detect: Vec<Vec<Detection>>,
    pub caption: Vec<String>,
    /// Served once the caption queue is empty.
    pub caption_fallback: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Call {
    Chat(ChatRequest),
    Detect(DetectionRequest),
    Caption(CaptionRequest),
}

impl Call {
    pub fn kind(&self) -> RequestKind {
        match self {
            Call::Chat(_) => RequestKind::Chat,
            Call::Detect(_) => RequestKind::Detect,
            Call::Caption(_) => RequestKind::Caption,
        }
    }
}

#[derive(Debug, Default)]
struct State {
    chat: VecDeque<String>,
    detect: VecDeque<Vec<Detection>>,
    caption: VecDeque<String>,
    log: Vec<Call>,
}

/// Test backend answering from fixed queues and logging every call.
#[derive(Debug)]
pub struct ScriptedBackend {
    state: Mutex<State>,
    caption_fallback: Option<String>,
}

impl ScriptedBackend {
    pub fn new(script: Script) -> Self {
        ScriptedBackend {
            state: Mutex::new(State {
                chat: script.chat.into(),
                detect: script.detect.into(),
                caption: script.caption.into(),
                log: Vec::new(),
            }),
            caption_fallback: script.caption_fallback,
        }
    }

    pub fn chat_only(responses: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self::new(Script {
            chat: responses.into_iter().map(Into::into).collect(),
            ..Script::default()
        })
    }

    fn state(&self) -> std::sync::MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn calls(&self) -> Vec<Call> {
        self.state().log.clone()
    }

    pub fn count(&self, kind: RequestKind) -> usize {
        self.state().log.iter().filter(|c| c.kind() == kind).count()
    }

    /// Chat requests received so far, in order.
    pub fn chat_requests(&self) -> Vec<ChatRequest> {
        self.state()
            .log
            .iter()
            .filter_map(|c| match c {
                Call::Chat(r) => Some(r.clone()),
                _ => None,
            })
            .collect()
    }
}

impl Backend for ScriptedBackend {
    fn chat(&self, req: &ChatRequest) -> Result<ChatResponse, BackendError> {
        req.check()?;
        let mut st = self.state();
        st.log.push(Call::Chat(req.clone()));
        let text = st.chat.pop_front().ok_or(BackendError::QueueExhausted(RequestKind::Chat))?;
        Ok(ChatResponse { text })
    }

    fn detect(&self, req: &DetectionRequest) -> Result<Vec<Detection>, BackendError> {
        req.check()?;
        let mut st = self.state();
        st.log.push(Call::Detect(req.clone()));
        st.detect.pop_front().ok_or(BackendError::QueueExhausted(RequestKind::Detect))
    }

    fn caption(&self, req: &CaptionRequest) -> Result<String, BackendError> {
        req.check()?;
        let mut st = self.state();
        st.log.push(Call::Caption(req.clone()));
        st.caption
            .pop_front()
            .or_else(|| self.caption_fallback.clone())
            .ok_or(BackendError::QueueExhausted(RequestKind::Caption))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::Message;
    use crate::scene::BoundingBox;

    #[test]
    fn queue_order_and_exhaustion() {
        let b = ScriptedBackend::chat_only(["A", "B"]);
        let req = ChatRequest::new(vec![Message::user("x")]);
        assert_eq!(b.chat(&req).unwrap().text, "A");
        assert_eq!(b.chat(&req).unwrap().text, "B");
        assert_eq!(b.chat(&req), Err(BackendError::QueueExhausted(RequestKind::Chat)));
        assert_eq!(b.count(RequestKind::Chat), 3);
        assert_eq!(b.count(RequestKind::Detect), 0);
    }

    #[test]
    fn caption_fallback() {
        let b = ScriptedBackend::new(Script {
            caption: vec!["first".into()],
            caption_fallback: Some("object".into()),
            ..Script::default()
        });
        let req = CaptionRequest {
            image: "i".into(),
            bbox: BoundingBox::new(0.0, 0.0, 1.0, 1.0),
            prompt: "p".into(),
        };
        assert_eq!(b.caption(&req).unwrap(), "first");
        assert_eq!(b.caption(&req).unwrap(), "object");
        assert_eq!(b.calls().len(), 2);
    }
}
