//! `affect-predict/1` wire format.
//!
//! ```text
//! predictor -> {"protocol": "affect-predict/1"}
//! toolkit   -> {"id": 12, "frame_path": "p03/lighter/000012.png"}
//! predictor -> {"id": 12, "arousal": 0.31, "valence": 0.55, "face_detected": true}
//! ```
//!
//! One JSON object per line. When `face_detected` is false, `arousal` and
//! `valence` are null (or absent).

use serde::{Deserialize, Serialize};

use super::{AffectSample, in_range};
use crate::error::PredictorError;

pub const PROTOCOL_VERSION: &str = "affect-predict/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Handshake {
    pub protocol: String,
}

impl Handshake {
    pub fn current() -> Self {
        Handshake {
            protocol: PROTOCOL_VERSION.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRequest {
    pub id: u64,
    pub frame_path: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionResponse {
    pub id: u64,
    #[serde(default)]
    pub arousal: Option<f64>,
    #[serde(default)]
    pub valence: Option<f64>,
    pub face_detected: bool,
}

impl PredictionResponse {
    pub fn detected(id: u64, arousal: f64, valence: f64) -> Self {
        PredictionResponse {
            id,
            arousal: Some(arousal),
            valence: Some(valence),
            face_detected: true,
        }
    }

    pub fn no_face(id: u64) -> Self {
        PredictionResponse {
            id,
            arousal: None,
            valence: None,
            face_detected: false,
        }
    }

    /// Checks range and null semantics.
    pub fn validate(&self) -> Result<(), PredictorError> {
        if self.face_detected {
            for (name, v) in [("arousal", self.arousal), ("valence", self.valence)] {
                match v {
                    None => {
                        return Err(PredictorError::Protocol(format!(
                            "response {}: {name} missing although face_detected is true",
                            self.id
                        )));
                    }
                    Some(v) if !in_range(v) => {
                        return Err(PredictorError::Protocol(format!(
                            "response {}: {name} = {v} outside [-1, 1]",
                            self.id
                        )));
                    }
                    Some(_) => {}
                }
            }
        } else if self.arousal.is_some() || self.valence.is_some() {
            return Err(PredictorError::Protocol(format!(
                "response {}: values must be null when face_detected is false",
                self.id
            )));
        }
        Ok(())
    }

    pub fn into_sample(self, frame_index: u64) -> AffectSample {
        if self.face_detected {
            AffectSample::new(frame_index, self.arousal, self.valence)
        } else {
            AffectSample::invalid(frame_index)
        }
    }
}

pub fn parse_handshake(line: &str) -> Result<(), PredictorError> {
    match serde_json::from_str::<Handshake>(line.trim()) {
        Ok(h) if h.protocol == PROTOCOL_VERSION => Ok(()),
        Ok(h) => Err(PredictorError::Handshake(format!(
            "unsupported protocol `{}` (expected {PROTOCOL_VERSION})",
            h.protocol
        ))),
        Err(_) => Err(PredictorError::Handshake(format!(
            "first line is not a handshake: {:?}",
            truncate(line)
        ))),
    }
}

/// Parses and validates a response to the outstanding request `expected_id`.
pub fn parse_response(line: &str, expected_id: u64) -> Result<PredictionResponse, PredictorError> {
    let response: PredictionResponse = serde_json::from_str(line.trim()).map_err(|e| {
        PredictorError::Protocol(format!("malformed response line {:?}: {e}", truncate(line)))
    })?;
    if response.id != expected_id {
        return Err(PredictorError::Protocol(format!(
            "unknown id {} (awaiting {expected_id})",
            response.id
        )));
    }
    response.validate()?;
    Ok(response)
}

fn truncate(line: &str) -> &str {
    let line = line.trim_end();
    match line.char_indices().nth(120) {
        Some((i, _)) => &line[..i],
        None => line,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn handshake_accepts_exact_version() {
        parse_handshake("{\"protocol\": \"affect-predict/1\"}\n").unwrap();
        assert!(parse_handshake(r#"{"protocol": "affect-predict/2"}"#).is_err());
        assert!(parse_handshake(r#"{"id": 0, "arousal": 0, "valence": 0, "face_detected": true}"#).is_err());
        assert!(parse_handshake("hello").is_err());
    }

    #[test]
    fn response_validation() {
        let ok = parse_response(r#"{"id": 12, "arousal": 0.31, "valence": 0.55, "face_detected": true}"#, 12).unwrap();
        assert_eq!(ok, PredictionResponse::detected(12, 0.31, 0.55));

        let none = parse_response(r#"{"id": 3, "arousal": null, "valence": null, "face_detected": false}"#, 3).unwrap();
        assert!(!none.into_sample(3).valid);
        parse_response(r#"{"id": 3, "face_detected": false}"#, 3).unwrap();

        let err = |line: &str, id| parse_response(line, id).unwrap_err().to_string();
        assert!(err(r#"{"id": 1, "arousal": 1.5, "valence": 0, "face_detected": true}"#, 1).contains("outside"));
        assert!(err(r#"{"id": 2, "arousal": 0.1, "valence": 0, "face_detected": true}"#, 1).contains("unknown id"));
        assert!(err(r#"{"id": 1, "valence": 0, "face_detected": true}"#, 1).contains("missing"));
        assert!(err(r#"{"id": 1, "arousal": 0.2, "face_detected": false}"#, 1).contains("null"));
        assert!(err("{not json", 1).contains("malformed"));
    }

    #[test]
    fn request_wire_shape() {
        let req = PredictionRequest {
            id: 12,
            frame_path: "p03/lighter/000012.png".into(),
        };
        assert_eq!(
            serde_json::to_string(&req).unwrap(),
            r#"{"id":12,"frame_path":"p03/lighter/000012.png"}"#
        );
    }
}
