//! Content keys for requests: SHA-256 over a canonical JSON form with
//! sorted object keys and whitespace-normalized strings.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{CaptionRequest, ChatRequest, DetectionRequest, RequestKind};

/// Hex-encoded 256-bit request key.
pub type Fingerprint = String;

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::String(s) => out.push_str(&Value::String(normalize_ws(s)).to_string()),
        other => out.push_str(&other.to_string()),
    }
}

/// Compact JSON with sorted keys and whitespace-normalized strings.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_canonical(v, &mut out);
    out
}

pub fn fingerprint_value(v: &Value) -> Fingerprint {
    hex::encode(Sha256::digest(canonical_json(v).as_bytes()))
}

/// Canonical request value tagged with its kind.
pub(crate) fn request_value<T: Serialize>(kind: RequestKind, req: &T) -> Value {
    let mut v = serde_json::to_value(req).expect("requests serialize");
    if let Value::Object(map) = &mut v {
        map.insert("kind".into(), Value::String(kind.to_string()));
    }
    v
}

pub trait Keyed: Serialize {
    const KIND: RequestKind;
}

impl Keyed for ChatRequest {
    const KIND: RequestKind = RequestKind::Chat;
}
impl Keyed for DetectionRequest {
    const KIND: RequestKind = RequestKind::Detect;
}
impl Keyed for CaptionRequest {
    const KIND: RequestKind = RequestKind::Caption;
}

pub fn fingerprint<T: Keyed>(req: &T) -> Fingerprint {
    fingerprint_value(&request_value(T::KIND, req))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::Message;
    use serde_json::json;

    #[test]
    fn empty_form_is_pinned() {
        assert_eq!(
            fingerprint_value(&json!({})),
            "44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a"
        );
    }

    #[test]
    fn key_order_and_whitespace_do_not_matter() {
        let a = json!({"b": 1, "a": {"y": "x  y\n", "x": [1, 2]}});
        let b = json!({"a": {"x": [1, 2], "y": " x y"}, "b": 1});
        assert_eq!(canonical_json(&a), r#"{"a":{"x":[1,2],"y":"x y"},"b":1}"#);
        assert_eq!(fingerprint_value(&a), fingerprint_value(&b));
    }

    #[test]
    fn one_character_changes_key() {
        let a = ChatRequest::new(vec![Message::user("slice the carrot")]);
        let b = ChatRequest::new(vec![Message::user("slice the carrots")]);
        assert_ne!(fingerprint(&a), fingerprint(&b));
        assert_eq!(fingerprint(&a).len(), 64);
    }

    #[test]
    fn decoding_params_are_keyed() {
        let a = ChatRequest::new(vec![Message::user("x")]);
        let mut b = a.clone();
        b.temperature = 0.7;
        let mut c = a.clone();
        c.max_tokens = 10;
        assert_ne!(fingerprint(&a), fingerprint(&b));
        assert_ne!(fingerprint(&a), fingerprint(&c));
    }

    #[test]
    fn kinds_do_not_collide() {
        let d = DetectionRequest { image: "i".into(), query: "q".into() };
        let v = serde_json::to_value(&d).unwrap();
        assert_ne!(fingerprint(&d), fingerprint_value(&v));
    }
}
