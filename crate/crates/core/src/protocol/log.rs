//! JSON Lines stroke logs: one header record, then client messages in arrival order.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{decode_client, encode, ClientMessage, Driver, DriverConfig, ServerMessage, SessionReport};
use crate::engine::source_sha256;
use crate::gutter::GutterGeometry;
use crate::session::Mode;

pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename = "header", rename_all = "camelCase")]
pub struct LogHeader {
    pub version: u32,
    pub program: String,
    pub mode: Mode,
    pub gutter_geometry: GutterGeometry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub program_sha256: Option<String>,
}

impl LogHeader {
    pub fn new(program: &str, source: &str, mode: Mode, gutter_geometry: GutterGeometry) -> Self {
        LogHeader {
            version: LOG_VERSION,
            program: program.to_string(),
            mode,
            gutter_geometry,
            program_sha256: Some(source_sha256(source)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrokeLog {
    pub header: LogHeader,
    pub records: Vec<ClientMessage>,
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("log is empty; expected a header record")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },
    #[error("log version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("log was recorded in {log} mode but replay asked for {requested} mode")]
    ModeMismatch { log: Mode, requested: Mode },
    #[error("program does not match the log (sha256 {actual}, log has {expected})")]
    ProgramMismatch { expected: String, actual: String },
    #[error("line {line}: loadProgram records are not allowed after the header")]
    UnexpectedLoad { line: usize },
    #[error("program failed to load: {0}")]
    Load(String),
}

impl StrokeLog {
    pub fn new(header: LogHeader) -> Self {
        StrokeLog { header, records: Vec::new() }
    }

    pub fn parse(text: &str) -> Result<StrokeLog, LogError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (idx, first) = lines.next().ok_or(LogError::MissingHeader)?;
        let header: LogHeader =
            serde_json::from_str(first).map_err(|e| LogError::Record { line: idx + 1, message: format!("bad header: {e}") })?;
        if header.version != LOG_VERSION {
            return Err(LogError::VersionMismatch { found: header.version, expected: LOG_VERSION });
        }
        let mut records = Vec::new();
        for (idx, line) in lines {
            let msg = decode_client(line).map_err(|e| LogError::Record { line: idx + 1, message: e.to_string() })?;
            if matches!(msg, ClientMessage::LoadProgram { .. }) {
                return Err(LogError::UnexpectedLoad { line: idx + 1 });
            }
            records.push(msg);
        }
        Ok(StrokeLog { header, records })
    }

    pub fn read(path: &Path) -> Result<StrokeLog, LogError> {
        StrokeLog::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = encode(&self.header);
        out.push('\n');
        for r in &self.records {
            out.push_str(&encode(r));
            out.push('\n');
        }
        out
    }
}

/// Appends records to a log file as they arrive, flushing each one so a
/// dropped connection still leaves a replayable prefix.
pub struct LogWriter {
    out: BufWriter<File>,
}

impl LogWriter {
    pub fn create(path: &Path, header: &LogHeader) -> io::Result<LogWriter> {
        let mut w = LogWriter { out: BufWriter::new(File::create(path)?) };
        w.write_line(&encode(header))?;
        Ok(w)
    }

    pub fn append(&mut self, msg: &ClientMessage) -> io::Result<()> {
        self.write_line(&encode(msg))
    }

    fn write_line(&mut self, line: &str) -> io::Result<()> {
        self.out.write_all(line.as_bytes())?;
        self.out.write_all(b"\n")?;
        self.out.flush()
    }
}

#[derive(Debug, Clone)]
pub struct Replay {
    pub report: SessionReport,
    pub messages: Vec<ServerMessage>,
}

/// Re-runs a log against `source` with the log's timestamps as the only clock.
pub fn replay(source: &str, log: &StrokeLog, mode: Mode, config: DriverConfig) -> Result<Replay, LogError> {
    let header = &log.header;
    if header.version != LOG_VERSION {
        return Err(LogError::VersionMismatch { found: header.version, expected: LOG_VERSION });
    }
    if header.mode != mode {
        return Err(LogError::ModeMismatch { log: header.mode, requested: mode });
    }
    if let Some(expected) = &header.program_sha256 {
        let actual = source_sha256(source);
        if &actual != expected {
            return Err(LogError::ProgramMismatch { expected: expected.clone(), actual });
        }
    }
    let mut driver = Driver::new(config);
    let mut messages = driver.handle(ClientMessage::LoadProgram {
        source: source.to_string(),
        gutter_geometry: header.gutter_geometry,
        mode,
        name: Some(header.program.clone()),
    });
    if driver.session().is_none() {
        let text = messages.iter().find_map(|m| match m {
            ServerMessage::Error { text } => Some(text.clone()),
            _ => None,
        });
        return Err(LogError::Load(text.unwrap_or_default()));
    }
    for r in &log.records {
        messages.extend(driver.handle(r.clone()));
    }
    Ok(Replay { report: driver.report(), messages })
}
