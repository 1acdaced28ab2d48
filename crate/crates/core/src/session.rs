//! Debug-session state machine over a pre-computed trace.

use std::collections::BTreeSet;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::engine::{EventKind, FrameSummary, Limits, Outcome, Program, Trace, VarValue};
use crate::gutter::{apply_gutter_mark, LineRange};
use crate::lang::Line;
use crate::recognizer::GestureKind;

pub const WARN_NO_BREAKPOINTS: &str = "Set a breakpoint before starting the debugger";
pub const WARN_NO_SESSION: &str = "No active debug session";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Sketch,
    Wimp,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sketch" => Ok(Mode::Sketch),
            "wimp" => Ok(Mode::Wimp),
            other => Err(format!("unknown mode `{other}` (expected sketch or wimp)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Sketch => "sketch",
            Mode::Wimp => "wimp",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "lowercase")]
pub enum Phase {
    Idle,
    Paused { cursor: usize },
    Terminated,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Idle => "idle",
            Phase::Paused { .. } => "paused",
            Phase::Terminated => "terminated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "camelCase")]
pub enum DebugCommand {
    ToggleGutterMark { range: LineRange },
    Start,
    Stop,
    StepInto,
    StepOver,
    StepOut,
    Continue,
}

impl From<GestureKind> for DebugCommand {
    fn from(kind: GestureKind) -> Self {
        match kind {
            GestureKind::Start => DebugCommand::Start,
            GestureKind::Stop => DebugCommand::Stop,
            GestureKind::Continue => DebugCommand::Continue,
            GestureKind::StepInto => DebugCommand::StepInto,
            GestureKind::StepOver => DebugCommand::StepOver,
            GestureKind::StepOut => DebugCommand::StepOut,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Stroke,
    Click,
    Keypress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ActionRecord {
    pub seq: usize,
    pub kind: InputKind,
    pub timestamp: f64,
    pub resolved_command: Option<DebugCommand>,
}

/// Something the session wants the client to know after a command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionEvent {
    StateChanged,
    Warning(String),
}

/// The client-facing picture of the session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StateView {
    pub phase: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_line: Option<Line>,
    pub variables: IndexMap<String, VarValue>,
    /// Innermost frame first, as debuggers display it.
    pub call_stack: Vec<FrameSummary>,
    pub breakpoints: Vec<Line>,
    pub console: String,
    pub mode: Mode,
}

#[derive(Debug, Clone)]
pub struct Session {
    program: Arc<Program>,
    limits: Limits,
    mode: Mode,
    phase: Phase,
    breakpoints: BTreeSet<Line>,
    trace: Option<Arc<Trace>>,
    console: String,
    actions: Vec<ActionRecord>,
    paused_lines: Vec<Line>,
}

impl Session {
    pub fn new(program: Arc<Program>, mode: Mode, limits: Limits) -> Self {
        Session {
            program,
            limits,
            mode,
            phase: Phase::Idle,
            breakpoints: BTreeSet::new(),
            trace: None,
            console: String::new(),
            actions: Vec::new(),
            paused_lines: Vec::new(),
        }
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn is_paused(&self) -> bool {
        matches!(self.phase, Phase::Paused { .. })
    }

    pub fn breakpoints(&self) -> &BTreeSet<Line> {
        &self.breakpoints
    }

    pub fn trace(&self) -> Option<&Trace> {
        self.trace.as_deref()
    }

    pub fn console(&self) -> &str {
        &self.console
    }

    pub fn actions(&self) -> &[ActionRecord] {
        &self.actions
    }

    /// Lines the session paused at, in order, across restarts.
    pub fn paused_line_history(&self) -> &[Line] {
        &self.paused_lines
    }

    pub fn current_line(&self) -> Option<Line> {
        match (self.phase, &self.trace) {
            (Phase::Paused { cursor }, Some(t)) => Some(t.events[cursor].line),
            _ => None,
        }
    }

    pub fn record_action(&mut self, kind: InputKind, timestamp: f64, resolved: Option<DebugCommand>) {
        self.actions.push(ActionRecord { seq: self.actions.len(), kind, timestamp, resolved_command: resolved });
    }

    pub fn view(&self) -> StateView {
        let (variables, call_stack) = match (self.phase, &self.trace) {
            (Phase::Paused { cursor }, Some(t)) => {
                let e = &t.events[cursor];
                (e.locals.clone(), e.stack.iter().rev().cloned().collect())
            }
            _ => (IndexMap::new(), Vec::new()),
        };
        StateView {
            phase: self.phase.name().to_string(),
            current_line: self.current_line(),
            variables,
            call_stack,
            breakpoints: self.breakpoints.iter().copied().collect(),
            console: self.console.clone(),
            mode: self.mode,
        }
    }

    pub fn handle(&mut self, cmd: DebugCommand) -> Vec<SessionEvent> {
        match cmd {
            DebugCommand::ToggleGutterMark { range } => self.gutter_mark(range),
            DebugCommand::Start => self.start(),
            DebugCommand::Stop => match self.phase {
                Phase::Paused { .. } => {
                    self.phase = Phase::Terminated;
                    vec![SessionEvent::StateChanged]
                }
                _ => vec![SessionEvent::Warning(WARN_NO_SESSION.into())],
            },
            DebugCommand::StepInto | DebugCommand::StepOver | DebugCommand::StepOut | DebugCommand::Continue => {
                self.step(cmd)
            }
        }
    }

    fn gutter_mark(&mut self, range: LineRange) -> Vec<SessionEvent> {
        let update = apply_gutter_mark(range, &self.breakpoints, &self.program.lines.executable);
        let mut out = Vec::new();
        if !update.is_noop() {
            update.apply(&mut self.breakpoints);
            out.push(SessionEvent::StateChanged);
        }
        if let Some(w) = update.warning {
            out.push(SessionEvent::Warning(w));
        }
        out
    }

    fn start(&mut self) -> Vec<SessionEvent> {
        if self.breakpoints.is_empty() {
            return vec![SessionEvent::Warning(WARN_NO_BREAKPOINTS.into())];
        }
        // the trace is deterministic, so a restart can reuse it
        let trace = self.trace.get_or_insert_with(|| Arc::new(self.program.trace(self.limits))).clone();
        self.console.clear();
        let first = trace.events.iter().position(|e| e.kind == EventKind::Line && self.breakpoints.contains(&e.line));
        match first {
            Some(cursor) => self.pause_at(&trace, cursor),
            None => self.terminate(&trace),
        }
        vec![SessionEvent::StateChanged]
    }

    fn step(&mut self, cmd: DebugCommand) -> Vec<SessionEvent> {
        let (Phase::Paused { cursor }, Some(trace)) = (self.phase, self.trace.clone()) else {
            return vec![SessionEvent::Warning(WARN_NO_SESSION.into())];
        };
        let depth = trace.events[cursor].depth;
        let bps = &self.breakpoints;
        let target = trace.events[cursor + 1..]
            .iter()
            .filter(|e| e.kind == EventKind::Line)
            .find(|e| {
                let at_bp = bps.contains(&e.line);
                match cmd {
                    DebugCommand::StepInto => true,
                    DebugCommand::StepOver => at_bp || e.depth <= depth,
                    DebugCommand::StepOut => at_bp || e.depth < depth,
                    DebugCommand::Continue => at_bp,
                    _ => unreachable!("not a stepping command"),
                }
            })
            .map(|e| e.index);
        match target {
            Some(next) => self.pause_at(&trace, next),
            None => self.terminate(&trace),
        }
        vec![SessionEvent::StateChanged]
    }

    fn pause_at(&mut self, trace: &Trace, cursor: usize) {
        self.phase = Phase::Paused { cursor };
        self.console = trace.console_until(cursor);
        self.paused_lines.push(trace.events[cursor].line);
    }

    fn terminate(&mut self, trace: &Trace) {
        self.phase = Phase::Terminated;
        self.console = trace.console_text();
        match &trace.outcome {
            Outcome::Completed { .. } => {}
            Outcome::RuntimeError { message, line } => self.console.push_str(&format!("line {line}: {message}\n")),
            Outcome::LimitExceeded { limit } => {
                self.console.push_str(&format!("execution stopped after {limit} steps (infinite loop suspected)\n"))
            }
        }
    }
}
