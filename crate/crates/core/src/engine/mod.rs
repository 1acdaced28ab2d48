//! Tree-walking interpreter that runs a program once and records every step.

mod interp;
pub mod value;

use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::lang::{self, Line, LineTable, Module, SyntaxError};

pub use value::{Builtin, Value, VarValue};

pub const DEFAULT_MAX_EVENTS: usize = 100_000;
pub const DEFAULT_MAX_DEPTH: usize = 1000;
pub const MODULE_FRAME: &str = "<module>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct Limits {
    pub max_events: usize,
    /// Maximum call depth; the module frame is depth 0.
    pub max_depth: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_events: DEFAULT_MAX_EVENTS, max_depth: DEFAULT_MAX_DEPTH }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Line,
    Call,
    Return,
    End,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FrameSummary {
    pub function: String,
    pub line: Line,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceEvent {
    pub index: usize,
    pub kind: EventKind,
    pub line: Line,
    pub depth: usize,
    pub function: String,
    pub locals: IndexMap<String, VarValue>,
    /// Outermost frame first.
    pub stack: Vec<FrameSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub return_value: Option<VarValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub console_delta: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "camelCase")]
pub enum Outcome {
    /// `value` is the result of the last top-level expression statement.
    Completed { value: Option<VarValue> },
    RuntimeError { message: String, line: Line },
    LimitExceeded { limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("trace index {index} out of range (trace has {len} events)")]
    IndexOutOfRange { index: usize, len: usize },
}

/// Top-frame view at one trace event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FrameView {
    pub function: String,
    pub depth: usize,
    pub line: Line,
    pub locals: IndexMap<String, VarValue>,
    pub stack: Vec<FrameSummary>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn line_events(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(|e| e.kind == EventKind::Line)
    }

    /// All console output, in order.
    pub fn console_text(&self) -> String {
        self.events.iter().filter_map(|e| e.console_delta.as_deref()).collect()
    }

    /// Console output produced up to and including event `index`.
    pub fn console_until(&self, index: usize) -> String {
        self.events[..=index.min(self.events.len() - 1)].iter().filter_map(|e| e.console_delta.as_deref()).collect()
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }

    /// Line events reduced to (line, depth, int/bool locals), the shape a
    /// stock line tracer produces.
    pub fn oracle_view(&self, program: &str) -> serde_json::Value {
        let events: Vec<serde_json::Value> = self
            .line_events()
            .map(|e| {
                let locals: serde_json::Map<String, serde_json::Value> = e
                    .locals
                    .iter()
                    .filter(|(_, v)| matches!(v, VarValue::Int { .. } | VarValue::Bool { .. }))
                    .map(|(k, v)| (k.clone(), serde_json::to_value(v).unwrap()))
                    .collect();
                serde_json::json!({ "line": e.line, "depth": e.depth, "locals": locals })
            })
            .collect();
        serde_json::json!({ "program": program, "lineEvents": events })
    }
}

pub fn locals_at(trace: &Trace, index: usize) -> Result<FrameView, EngineError> {
    let e = trace.events.get(index).ok_or(EngineError::IndexOutOfRange { index, len: trace.events.len() })?;
    Ok(FrameView { function: e.function.clone(), depth: e.depth, line: e.line, locals: e.locals.clone(), stack: e.stack.clone() })
}

/// Executes `module` to completion and records its trace.
pub fn build_trace(module: &Module, limits: Limits) -> Trace {
    // deep recursion in the interpreted program recurses in the host; give it room
    let module = module.clone();
    std::thread::Builder::new()
        .name("trace-builder".into())
        .stack_size(256 << 20)
        .spawn(move || interp::run(&module, limits))
        .expect("spawn trace builder")
        .join()
        .expect("trace builder panicked")
}

/// A parsed program ready to be traced.
#[derive(Debug, Clone)]
pub struct Program {
    pub source: Arc<str>,
    pub module: Module,
    pub lines: LineTable,
}

impl Program {
    pub fn parse(source: &str) -> Result<Program, SyntaxError> {
        let (module, lines) = lang::parse_source(source)?;
        Ok(Program { source: source.into(), module, lines })
    }

    pub fn sha256(&self) -> String {
        source_sha256(&self.source)
    }

    pub fn trace(&self, limits: Limits) -> Trace {
        build_trace(&self.module, limits)
    }
}

pub fn source_sha256(source: &str) -> String {
    hex::encode(Sha256::digest(source.as_bytes()))
}
