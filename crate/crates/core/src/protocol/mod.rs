//! Wire protocol, session driver, stroke logs, replay and the WebSocket service.

pub mod config;
mod driver;
pub mod log;
pub mod server;

use serde::{Deserialize, Serialize};

use crate::gutter::GutterGeometry;
use crate::lang::Line;
use crate::recognizer::GestureKind;
use crate::session::{Mode, StateView};
use crate::stroke::{Point, Pointer, StrokeId};

pub use driver::{Driver, DriverConfig, SessionReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WimpInput {
    Click,
    Keypress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum ClientMessage {
    #[serde(rename_all = "camelCase")]
    LoadProgram {
        source: String,
        #[serde(default)]
        gutter_geometry: GutterGeometry,
        #[serde(default)]
        mode: Mode,
        /// File name recorded in stroke-log headers.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    StrokeBegin {
        id: StrokeId,
        pointer: Pointer,
        t: f64,
    },
    StrokePoints {
        id: StrokeId,
        points: Vec<Point>,
    },
    StrokeEnd {
        id: StrokeId,
        t: f64,
    },
    /// A complete stroke in one record.
    Stroke {
        id: StrokeId,
        pointer: Pointer,
        points: Vec<Point>,
    },
    #[serde(rename = "wimp", rename_all = "camelCase")]
    WimpCommand {
        name: String,
        input_kind: WimpInput,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        line: Option<Line>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t: Option<f64>,
    },
    SetMode {
        mode: Mode,
    },
}

const CLIENT_TYPES: &[&str] = &["loadProgram", "strokeBegin", "strokePoints", "strokeEnd", "stroke", "wimp", "setMode"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum ServerMessage {
    StateUpdate(StateView),
    #[serde(rename_all = "camelCase")]
    InkFeedback {
        stroke_id: StrokeId,
        accepted: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kind: Option<GestureKind>,
        score: f64,
    },
    #[serde(rename_all = "camelCase")]
    SpiralTick {
        stroke_id: StrokeId,
        steps_total: u32,
    },
    Warning {
        text: String,
    },
    Error {
        text: String,
    },
}

impl ServerMessage {
    pub fn warning(text: impl Into<String>) -> Self {
        ServerMessage::Warning { text: text.into() }
    }

    pub fn error(text: impl Into<String>) -> Self {
        ServerMessage::Error { text: text.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown message type `{0}`")]
    UnknownType(String),
    #[error("invalid message: {0}")]
    Invalid(String),
}

impl DecodeError {
    pub fn to_reply(&self) -> ServerMessage {
        ServerMessage::error(self.to_string())
    }
}

pub fn encode<T: Serialize>(msg: &T) -> String {
    serde_json::to_string(msg).expect("protocol messages serialize")
}

pub fn decode_client(text: &str) -> Result<ClientMessage, DecodeError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| DecodeError::Parse(e.to_string()))?;
    let ty = value
        .get("type")
        .and_then(|t| t.as_str())
        .ok_or_else(|| DecodeError::Invalid("missing string field `type`".into()))?;
    if !CLIENT_TYPES.contains(&ty) {
        return Err(DecodeError::UnknownType(ty.to_string()));
    }
    serde_json::from_value(value).map_err(|e| DecodeError::Invalid(e.to_string()))
}

pub fn decode_server(text: &str) -> Result<ServerMessage, DecodeError> {
    serde_json::from_str(text).map_err(|e| DecodeError::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wimp_schema_instance() {
        let msg = decode_client(r#"{"type":"wimp","name":"stepOver","inputKind":"click"}"#).unwrap();
        assert_eq!(msg, ClientMessage::WimpCommand { name: "stepOver".into(), input_kind: WimpInput::Click, line: None, t: None });
    }

    #[test]
    fn unknown_fields_are_ignored() {
        let msg = decode_client(r#"{"type":"setMode","mode":"wimp","extra":[1,2]}"#).unwrap();
        assert_eq!(msg, ClientMessage::SetMode { mode: Mode::Wimp });
    }

    #[test]
    fn decode_errors() {
        assert!(matches!(decode_client(r#"{"type":"wimp","name":"st"#), Err(DecodeError::Parse(_))));
        assert!(matches!(decode_client(r#"{"type":"teleport"}"#), Err(DecodeError::UnknownType(t)) if t == "teleport"));
        assert!(matches!(decode_client(r#"{"name":"x"}"#), Err(DecodeError::Invalid(_))));
        assert!(matches!(decode_client(r#"{"type":"strokeEnd","id":"one"}"#), Err(DecodeError::Invalid(_))));
        let reply = DecodeError::UnknownType("x".into()).to_reply();
        assert!(matches!(reply, ServerMessage::Error { .. }));
    }

    #[test]
    fn stroke_record_matches_log_format() {
        let text = r#"{"type":"stroke","id":7,"pointer":"pen","points":[[1.0,2.0,0.0],[3.5,4.0,10.0]]}"#;
        let msg = decode_client(text).unwrap();
        assert_eq!(encode(&msg), text);
    }

    #[test]
    fn load_program_defaults() {
        let msg = decode_client(r#"{"type":"loadProgram","source":"x = 1\n"}"#).unwrap();
        let ClientMessage::LoadProgram { gutter_geometry, mode, .. } = msg else { panic!() };
        assert_eq!(gutter_geometry, GutterGeometry::default());
        assert_eq!(mode, Mode::Sketch);
    }
}
