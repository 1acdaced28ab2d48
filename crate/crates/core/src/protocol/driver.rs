use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ClientMessage, ServerMessage, WimpInput};
use crate::engine::{Limits, Program};
use crate::gutter::{is_gutter_stroke, lines_spanned, GutterGeometry, LineRange};
use crate::lang::Line;
use crate::recognizer::{GestureKind, Recognizer};
use crate::session::{DebugCommand, InputKind, Mode, Session, SessionEvent, StateView};
use crate::spiral::{SpiralParams, SpiralState};
use crate::stroke::{Point, Pointer, Stroke, StrokeId};

pub const WARN_SKETCH_DISABLED: &str = "Sketch input is disabled in WIMP mode";
pub const WARN_TOOLBAR_DISABLED: &str = "Toolbar commands are disabled in sketch mode";

#[derive(Debug, Clone)]
pub struct DriverConfig {
    pub recognizer: Arc<Recognizer>,
    pub spiral: SpiralParams,
    pub limits: Limits,
}

impl Default for DriverConfig {
    fn default() -> Self {
        DriverConfig { recognizer: Arc::new(Recognizer::default()), spiral: SpiralParams::default(), limits: Limits::default() }
    }
}

/// Offline summary of a session, as printed by `replay`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionReport {
    pub actions: usize,
    pub strokes: usize,
    pub clicks: usize,
    pub keypresses: usize,
    pub final_phase: String,
    pub console_text: String,
    pub paused_line_history: Vec<Line>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_state: Option<StateView>,
}

struct InFlight {
    stroke: Stroke,
    spiral: SpiralState,
    // execution-flow command locked in at dwell time and already executed
    base: Option<GestureKind>,
    ignored: bool,
}

/// Turns client messages into session commands. Shared by the live service
/// and offline replay so both follow identical rules; all timing comes from
/// the timestamps carried by the messages.
pub struct Driver {
    config: DriverConfig,
    session: Option<Session>,
    geometry: GutterGeometry,
    strokes: BTreeMap<StrokeId, InFlight>,
    clock: f64,
}

impl Driver {
    pub fn new(config: DriverConfig) -> Self {
        Driver { config, session: None, geometry: GutterGeometry::default(), strokes: BTreeMap::new(), clock: 0.0 }
    }

    pub fn session(&self) -> Option<&Session> {
        self.session.as_ref()
    }

    pub fn geometry(&self) -> &GutterGeometry {
        &self.geometry
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        let mut out = Vec::new();
        if let ClientMessage::LoadProgram { source, gutter_geometry, mode, .. } = msg {
            self.load(&source, gutter_geometry, mode, &mut out);
            return out;
        }
        if self.session.is_none() {
            out.push(ServerMessage::error("no program loaded"));
            return out;
        }
        match msg {
            ClientMessage::LoadProgram { .. } => unreachable!(),
            ClientMessage::StrokeBegin { id, pointer, t } => self.stroke_begin(id, pointer, t, &mut out),
            ClientMessage::StrokePoints { id, points } => self.stroke_points(id, &points, &mut out),
            ClientMessage::StrokeEnd { id, t } => self.stroke_end(id, t, &mut out),
            ClientMessage::Stroke { id, pointer, points } => {
                let t0 = points.first().map_or(self.clock, |p| p.t);
                let t1 = points.last().map_or(t0, |p| p.t);
                self.stroke_begin(id, pointer, t0, &mut out);
                self.stroke_points(id, &points, &mut out);
                self.stroke_end(id, t1, &mut out);
            }
            ClientMessage::WimpCommand { name, input_kind, line, t } => self.wimp(&name, input_kind, line, t, &mut out),
            ClientMessage::SetMode { mode } => {
                let session = self.session.as_mut().unwrap();
                if session.mode() != mode {
                    session.set_mode(mode);
                    out.push(ServerMessage::StateUpdate(session.view()));
                }
            }
        }
        out
    }

    fn load(&mut self, source: &str, geometry: GutterGeometry, mode: Mode, out: &mut Vec<ServerMessage>) {
        if let Err(e) = geometry.validate() {
            out.push(ServerMessage::error(e));
            return;
        }
        match Program::parse(source) {
            Ok(program) => {
                let session = Session::new(Arc::new(program), mode, self.config.limits);
                out.push(ServerMessage::StateUpdate(session.view()));
                self.session = Some(session);
                self.geometry = geometry;
                self.strokes.clear();
            }
            Err(e) => out.push(ServerMessage::error(format!("syntax error: {e}"))),
        }
    }

    fn tick_clock(&mut self, t: f64) {
        if t > self.clock {
            self.clock = t;
        }
    }

    fn session_mut(&mut self) -> &mut Session {
        self.session.as_mut().expect("program loaded")
    }

    fn run_command(&mut self, cmd: DebugCommand, out: &mut Vec<ServerMessage>) {
        let session = self.session.as_mut().expect("program loaded");
        let events = session.handle(cmd);
        let mut sent_state = false;
        for e in events {
            match e {
                SessionEvent::StateChanged if !sent_state => {
                    sent_state = true;
                    out.push(ServerMessage::StateUpdate(session.view()));
                }
                SessionEvent::StateChanged => {}
                SessionEvent::Warning(w) => out.push(ServerMessage::Warning { text: w }),
            }
        }
    }

    fn stroke_begin(&mut self, id: StrokeId, pointer: Pointer, t: f64, out: &mut Vec<ServerMessage>) {
        self.tick_clock(t);
        if self.strokes.contains_key(&id) {
            out.push(ServerMessage::error(format!("stroke {id} already in progress")));
            return;
        }
        let ignored = self.session_mut().mode() == Mode::Wimp;
        if ignored {
            out.push(ServerMessage::warning(WARN_SKETCH_DISABLED));
        }
        let flight = InFlight { stroke: Stroke::new(id, pointer, Vec::new()), spiral: SpiralState::new(), base: None, ignored };
        self.strokes.insert(id, flight);
    }

    fn stroke_points(&mut self, id: StrokeId, points: &[Point], out: &mut Vec<ServerMessage>) {
        let Some(mut flight) = self.strokes.remove(&id) else {
            out.push(ServerMessage::error(format!("unknown stroke {id}")));
            return;
        };
        if !flight.ignored {
            for &p in points {
                self.feed(&mut flight, p, out);
            }
        }
        self.strokes.insert(id, flight);
    }

    fn feed(&mut self, flight: &mut InFlight, p: Point, out: &mut Vec<ServerMessage>) {
        let outcome = match flight.spiral.feed_point(p, &self.config.spiral) {
            Ok(o) => o,
            Err(e) => {
                out.push(ServerMessage::error(format!("stroke {}: {e}", flight.stroke.id)));
                return;
            }
        };
        self.tick_clock(p.t);
        flight.stroke.points.push(p);
        if outcome.dwell_detected {
            self.resolve_dwell(flight, out);
        }
        for _ in 0..outcome.ticks {
            let Some(kind) = flight.base else { break };
            if !self.session_mut().is_paused() {
                flight.spiral.finish();
                break;
            }
            out.push(ServerMessage::SpiralTick { stroke_id: flight.stroke.id, steps_total: flight.spiral.steps_emitted + 1 });
            self.run_command(kind.into(), out);
            if !self.session_mut().is_paused() {
                // program ended: repetition stops
                flight.spiral.finish();
            }
        }
    }

    /// The pen rested long enough for the prefix to count as a base stroke.
    fn resolve_dwell(&mut self, flight: &mut InFlight, out: &mut Vec<ServerMessage>) {
        if is_gutter_stroke(&flight.stroke, &self.geometry) {
            flight.spiral.lock(None);
            return;
        }
        let result = self.config.recognizer.recognize(&flight.stroke);
        match result.accepted_kind() {
            Some(kind) if kind.is_execution_flow() => {
                flight.spiral.lock(Some(kind));
                flight.base = Some(kind);
                out.push(ServerMessage::InkFeedback {
                    stroke_id: flight.stroke.id,
                    accepted: true,
                    kind: Some(kind),
                    score: result.score,
                });
                self.run_command(kind.into(), out);
                if !self.session_mut().is_paused() {
                    flight.spiral.finish();
                }
            }
            _ => flight.spiral.lock(None),
        }
    }

    fn stroke_end(&mut self, id: StrokeId, t: f64, out: &mut Vec<ServerMessage>) {
        self.tick_clock(t);
        let Some(mut flight) = self.strokes.remove(&id) else {
            out.push(ServerMessage::error(format!("unknown stroke {id}")));
            return;
        };
        if flight.ignored {
            return;
        }
        flight.spiral.finish();
        if let Some(kind) = flight.base {
            self.session_mut().record_action(InputKind::Stroke, t, Some(kind.into()));
            return;
        }
        let resolved = if flight.stroke.points.is_empty() {
            out.push(ServerMessage::InkFeedback { stroke_id: id, accepted: false, kind: None, score: 0.0 });
            None
        } else if is_gutter_stroke(&flight.stroke, &self.geometry) {
            let cmd = DebugCommand::ToggleGutterMark { range: lines_spanned(&flight.stroke, &self.geometry) };
            out.push(ServerMessage::InkFeedback { stroke_id: id, accepted: true, kind: None, score: 1.0 });
            self.run_command(cmd, out);
            Some(cmd)
        } else {
            let result = self.config.recognizer.recognize(&flight.stroke);
            let kind = result.accepted_kind();
            out.push(ServerMessage::InkFeedback { stroke_id: id, accepted: result.accepted, kind, score: result.score });
            kind.map(|k| {
                let cmd = DebugCommand::from(k);
                self.run_command(cmd, out);
                cmd
            })
        };
        self.session_mut().record_action(InputKind::Stroke, t, resolved);
    }

    fn wimp(&mut self, name: &str, input: WimpInput, line: Option<Line>, t: Option<f64>, out: &mut Vec<ServerMessage>) {
        if let Some(t) = t {
            self.tick_clock(t);
        }
        if self.session_mut().mode() == Mode::Sketch {
            out.push(ServerMessage::warning(WARN_TOOLBAR_DISABLED));
            return;
        }
        let cmd = match (name, line) {
            ("toggleBreakpoint", Some(line)) => DebugCommand::ToggleGutterMark { range: LineRange::single(line) },
            ("toggleBreakpoint", None) => {
                out.push(ServerMessage::error("toggleBreakpoint needs a line"));
                return;
            }
            ("restart", _) => DebugCommand::Start,
            (other, _) => match other.parse::<GestureKind>() {
                Ok(kind) => kind.into(),
                Err(_) => {
                    out.push(ServerMessage::error(format!("unknown command `{other}`")));
                    return;
                }
            },
        };
        let kind = match input {
            WimpInput::Click => InputKind::Click,
            WimpInput::Keypress => InputKind::Keypress,
        };
        let at = self.clock;
        self.session_mut().record_action(kind, at, Some(cmd));
        self.run_command(cmd, out);
    }

    pub fn report(&self) -> SessionReport {
        let Some(session) = &self.session else {
            return SessionReport {
                actions: 0,
                strokes: 0,
                clicks: 0,
                keypresses: 0,
                final_phase: "idle".into(),
                console_text: String::new(),
                paused_line_history: Vec::new(),
                final_state: None,
            };
        };
        let count = |k: InputKind| session.actions().iter().filter(|a| a.kind == k).count();
        SessionReport {
            actions: session.actions().len(),
            strokes: count(InputKind::Stroke),
            clicks: count(InputKind::Click),
            keypresses: count(InputKind::Keypress),
            final_phase: session.phase().name().to_string(),
            console_text: session.console().to_string(),
            paused_line_history: session.paused_line_history().to_vec(),
            final_state: Some(session.view()),
        }
    }
}
