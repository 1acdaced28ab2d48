use sketchbug::gutter::GutterGeometry;
use sketchbug::protocol::log::{replay, LogError, StrokeLog};
use sketchbug::protocol::{ClientMessage, Driver, DriverConfig, ServerMessage};
use sketchbug::recognizer::GestureKind;
use sketchbug::session::Mode;
use sketchbug::stroke::Pointer;
use sketchbug::synth::{self, scenario};

const VARIATION_1: &str = include_str!("fixtures/variation1.py");

fn load(driver: &mut Driver, mode: Mode) -> Vec<ServerMessage> {
    driver.handle(ClientMessage::LoadProgram {
        source: VARIATION_1.into(),
        gutter_geometry: GutterGeometry::default(),
        mode,
        name: None,
    })
}

fn stroke(id: u64, points: Vec<sketchbug::stroke::Point>) -> ClientMessage {
    ClientMessage::Stroke { id, pointer: Pointer::Pen, points }
}

fn state_lines(msgs: &[ServerMessage]) -> Vec<Option<u32>> {
    msgs.iter()
        .filter_map(|m| match m {
            ServerMessage::StateUpdate(v) => Some(v.current_line),
            _ => None,
        })
        .collect()
}

fn steps_taken(r: &sketchbug::protocol::log::Replay) -> usize {
    // every pause after the one reached by Start
    r.report.paused_line_history.len() - 1
}

#[test]
fn gutter_mark_then_start_pauses_at_line() {
    let mut d = Driver::new(DriverConfig::default());
    load(&mut d, Mode::Sketch);
    let geometry = GutterGeometry::default();
    let msgs = d.handle(stroke(1, synth::gutter_tick(&geometry, 5, 0.0)));
    assert!(matches!(msgs[0], ServerMessage::InkFeedback { accepted: true, kind: None, .. }));
    let ServerMessage::StateUpdate(v) = &msgs[1] else { panic!("{msgs:?}") };
    assert_eq!(v.breakpoints, vec![5]);

    let s = synth::polyline(&synth::shape_at(GestureKind::Start, 200.0, 100.0, 80.0), 1_000.0, 600.0);
    let msgs = d.handle(stroke(2, s));
    assert!(matches!(msgs[0], ServerMessage::InkFeedback { accepted: true, kind: Some(GestureKind::Start), .. }));
    assert_eq!(state_lines(&msgs), vec![Some(5)]);
}

#[test]
fn feedback_precedes_state_and_rejections_change_nothing() {
    let mut d = Driver::new(DriverConfig::default());
    load(&mut d, Mode::Sketch);
    d.handle(stroke(1, synth::gutter_tick(&GutterGeometry::default(), 5, 0.0)));
    d.handle(stroke(2, synth::polyline(&synth::shape_at(GestureKind::Start, 200.0, 100.0, 80.0), 1_000.0, 600.0)));

    let msgs = d.handle(stroke(3, synth::polyline(&synth::caret_at(200.0, 300.0), 2_000.0, 300.0)));
    assert!(matches!(msgs[0], ServerMessage::InkFeedback { accepted: true, kind: Some(GestureKind::StepOver), .. }));
    assert_eq!(state_lines(&msgs), vec![Some(6)]);

    let scribble = synth::tremor(sketchbug::stroke::Point::new(300.0, 300.0, 0.0), 3_000.0, 190.0, 2.5, 4);
    let msgs = d.handle(stroke(4, scribble));
    assert_eq!(msgs.len(), 1, "{msgs:?}");
    assert!(matches!(msgs[0], ServerMessage::InkFeedback { accepted: false, kind: None, .. }));
    assert_eq!(d.report().actions, 4);
}

#[test]
fn incremental_stroke_messages_drive_the_spiral_while_pen_is_down() {
    let mut d = Driver::new(DriverConfig::default());
    load(&mut d, Mode::Sketch);
    d.handle(stroke(1, synth::gutter_tick(&GutterGeometry::default(), 5, 0.0)));
    d.handle(stroke(2, synth::polyline(&synth::shape_at(GestureKind::Start, 200.0, 100.0, 80.0), 1_000.0, 600.0)));
    let pts = synth::gesture_then_spiral(GestureKind::StepOver, 200.0, 300.0, 4_000.0, 400.0, 400.0, 1.0, 2_000.0);
    d.handle(ClientMessage::StrokeBegin { id: 9, pointer: Pointer::Mouse, t: pts[0].t });
    let mut during = Vec::new();
    for batch in pts.chunks(2) {
        during.extend(d.handle(ClientMessage::StrokePoints { id: 9, points: batch.to_vec() }));
    }
    let ticks = during.iter().filter(|m| matches!(m, ServerMessage::SpiralTick { .. })).count();
    assert_eq!(ticks, 4);
    let first_state = during.iter().position(|m| matches!(m, ServerMessage::StateUpdate(_))).unwrap();
    let feedback = during.iter().position(|m| matches!(m, ServerMessage::InkFeedback { .. })).unwrap();
    assert!(feedback < first_state);
    let end = d.handle(ClientMessage::StrokeEnd { id: 9, t: pts.last().unwrap().t + 5.0 });
    assert!(end.is_empty(), "{end:?}");
    let report = d.report();
    assert_eq!(report.actions, 3);
    assert_eq!(report.paused_line_history.len(), 1 + 1 + 4);
}

#[test]
fn sketch_traversal_takes_three_actions() {
    let log = scenario::traversal_sketch("variation1.py", VARIATION_1, 5, scenario::TWENTY_STEP_SPIN_MS);
    let r = replay(VARIATION_1, &log, Mode::Sketch, DriverConfig::default()).unwrap();
    assert_eq!(r.report.actions, 3);
    assert_eq!(r.report.strokes, 3);
    assert_eq!(steps_taken(&r), 20);
    assert_eq!(r.report.final_phase, "paused");
}

#[test]
fn wimp_traversal_takes_twenty_two_actions() {
    let log = scenario::traversal_wimp("variation1.py", VARIATION_1, 5, 20);
    let r = replay(VARIATION_1, &log, Mode::Wimp, DriverConfig::default()).unwrap();
    assert_eq!((r.report.actions, r.report.clicks, r.report.keypresses), (22, 21, 1));
    assert_eq!(steps_taken(&r), 20);

    let sketch = replay(
        VARIATION_1,
        &scenario::traversal_sketch("variation1.py", VARIATION_1, 5, scenario::TWENTY_STEP_SPIN_MS),
        Mode::Sketch,
        DriverConfig::default(),
    )
    .unwrap();
    // both modes walk the same lines
    assert_eq!(sketch.report.paused_line_history, r.report.paused_line_history);
    assert_eq!(sketch.report.final_state.unwrap().variables, r.report.final_state.unwrap().variables);
}

#[test]
fn empty_log_reports_idle() {
    let log = StrokeLog::new(sketchbug::protocol::log::LogHeader::new("v.py", VARIATION_1, Mode::Sketch, GutterGeometry::default()));
    let r = replay(VARIATION_1, &log, Mode::Sketch, DriverConfig::default()).unwrap();
    assert_eq!(r.report.actions, 0);
    assert_eq!(r.report.final_phase, "idle");
}

#[test]
fn log_round_trips_through_jsonl() {
    let log = scenario::traversal_sketch("variation1.py", VARIATION_1, 5, 1_000.0);
    let text = log.to_jsonl();
    assert!(text.lines().next().unwrap().starts_with(r#"{"type":"header","version":1"#));
    assert_eq!(StrokeLog::parse(&text).unwrap(), log);
}

#[test]
fn replay_is_byte_deterministic() {
    let log = scenario::traversal_sketch("variation1.py", VARIATION_1, 5, scenario::TWENTY_STEP_SPIN_MS);
    let a = replay(VARIATION_1, &log, Mode::Sketch, DriverConfig::default()).unwrap();
    let b = replay(VARIATION_1, &StrokeLog::parse(&log.to_jsonl()).unwrap(), Mode::Sketch, DriverConfig::default()).unwrap();
    assert_eq!(serde_json::to_string(&a.report).unwrap(), serde_json::to_string(&b.report).unwrap());
}

#[test]
fn replay_rejects_mismatches() {
    let log = scenario::traversal_wimp("variation1.py", VARIATION_1, 5, 2);
    assert!(matches!(replay(VARIATION_1, &log, Mode::Sketch, DriverConfig::default()), Err(LogError::ModeMismatch { .. })));
    assert!(matches!(replay("x = 1\n", &log, Mode::Wimp, DriverConfig::default()), Err(LogError::ProgramMismatch { .. })));

    let text = log.to_jsonl().replacen(r#""version":1"#, r#""version":7"#, 1);
    assert!(matches!(StrokeLog::parse(&text), Err(LogError::VersionMismatch { found: 7, .. })));
    assert!(matches!(StrokeLog::parse(""), Err(LogError::MissingHeader)));
    let bad = format!("{}{{\"type\":\"wimp\"\n", log.to_jsonl());
    assert!(matches!(StrokeLog::parse(&bad), Err(LogError::Record { .. })));
}

#[test]
fn inputs_from_the_other_mode_are_not_counted() {
    let mut d = Driver::new(DriverConfig::default());
    load(&mut d, Mode::Sketch);
    let msgs = d.handle(ClientMessage::WimpCommand {
        name: "start".into(),
        input_kind: sketchbug::protocol::WimpInput::Keypress,
        line: None,
        t: None,
    });
    assert!(matches!(msgs.as_slice(), [ServerMessage::Warning { .. }]));
    d.handle(ClientMessage::SetMode { mode: Mode::Wimp });
    let msgs = d.handle(stroke(1, synth::gutter_tick(&GutterGeometry::default(), 5, 0.0)));
    assert!(matches!(msgs.as_slice(), [ServerMessage::Warning { .. }]));
    assert_eq!(d.report().actions, 0);
}

#[test]
fn start_without_breakpoints_warns_in_both_modes() {
    for mode in [Mode::Sketch, Mode::Wimp] {
        let mut d = Driver::new(DriverConfig::default());
        load(&mut d, mode);
        let msgs = match mode {
            Mode::Sketch => d.handle(stroke(1, synth::polyline(&synth::shape_at(GestureKind::Start, 200.0, 100.0, 80.0), 0.0, 600.0))),
            Mode::Wimp => d.handle(ClientMessage::WimpCommand {
                name: "start".into(),
                input_kind: sketchbug::protocol::WimpInput::Keypress,
                line: None,
                t: Some(0.0),
            }),
        };
        assert!(msgs.iter().any(|m| matches!(m, ServerMessage::Warning { text } if text.contains("breakpoint"))), "{msgs:?}");
        assert!(!msgs.iter().any(|m| matches!(m, ServerMessage::StateUpdate(_))));
        assert_eq!(d.report().actions, 1);
    }
}

#[test]
fn messages_before_load_are_errors() {
    let mut d = Driver::new(DriverConfig::default());
    let msgs = d.handle(ClientMessage::SetMode { mode: Mode::Wimp });
    assert!(matches!(msgs.as_slice(), [ServerMessage::Error { .. }]));
    let msgs = d.handle(ClientMessage::LoadProgram {
        source: "x = (".into(),
        gutter_geometry: GutterGeometry::default(),
        mode: Mode::Sketch,
        name: None,
    });
    assert!(matches!(&msgs[0], ServerMessage::Error { text } if text.contains("syntax error")));
}
