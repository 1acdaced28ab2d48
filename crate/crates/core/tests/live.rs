use futures_util::{SinkExt, StreamExt};
use sketchbug::gutter::GutterGeometry;
use sketchbug::protocol::log::{replay, StrokeLog};
use sketchbug::protocol::server::{serve, Preload, ServerConfig};
use sketchbug::protocol::{decode_server, encode, ClientMessage, DriverConfig, ServerMessage};
use sketchbug::recognizer::GestureKind;
use sketchbug::session::Mode;
use sketchbug::stroke::Pointer;
use sketchbug::synth;
use tokio::net::TcpListener;
use tokio_tungstenite::tungstenite::Message;

const VARIATION_1: &str = include_str!("fixtures/variation1.py");
const SENTINEL: &str = r#"{"type":"ping"}"#;

type Socket = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn start(config: ServerConfig) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve(listener, config));
    format!("ws://{addr}")
}

/// Sends the sentinel and collects everything up to its error reply.
async fn drain(ws: &mut Socket) -> Vec<ServerMessage> {
    ws.send(Message::Text(SENTINEL.into())).await.unwrap();
    let mut out = Vec::new();
    while let Some(frame) = ws.next().await {
        let Message::Text(text) = frame.unwrap() else { continue };
        let msg = decode_server(&text).unwrap();
        if matches!(&msg, ServerMessage::Error { text } if text.contains("`ping`")) {
            return out;
        }
        out.push(msg);
    }
    panic!("socket closed early");
}

async fn send(ws: &mut Socket, msg: &ClientMessage) {
    ws.send(Message::Text(encode(msg))).await.unwrap();
}

async fn send_stroke_incrementally(ws: &mut Socket, id: u64, points: &[sketchbug::stroke::Point]) {
    send(ws, &ClientMessage::StrokeBegin { id, pointer: Pointer::Pen, t: points[0].t }).await;
    for batch in points.chunks(3) {
        send(ws, &ClientMessage::StrokePoints { id, points: batch.to_vec() }).await;
    }
    send(ws, &ClientMessage::StrokeEnd { id, t: points.last().unwrap().t }).await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn live_session_replays_to_same_state() {
    let dir = tempfile::tempdir().unwrap();
    let url = start(ServerConfig { driver: DriverConfig::default(), preload: None, record_dir: Some(dir.path().into()) }).await;
    let (mut ws, _) = tokio_tungstenite::connect_async(&url).await.unwrap();

    let load = ClientMessage::LoadProgram {
        source: VARIATION_1.into(),
        gutter_geometry: GutterGeometry::default(),
        mode: Mode::Sketch,
        name: Some("variation1.py".into()),
    };
    send(&mut ws, &load).await;
    let geometry = GutterGeometry::default();
    send_stroke_incrementally(&mut ws, 1, &synth::gutter_tick(&geometry, 5, 100.0)).await;
    send_stroke_incrementally(&mut ws, 2, &synth::polyline(&synth::shape_at(GestureKind::Start, 200.0, 100.0, 80.0), 500.0, 600.0))
        .await;
    let spin = synth::gesture_then_spiral(GestureKind::StepOver, 200.0, 300.0, 2_000.0, 400.0, 400.0, 1.0, 3_000.0);
    send_stroke_incrementally(&mut ws, 3, &spin).await;
    let live = drain(&mut ws).await;
    ws.close(None).await.unwrap();

    let ServerMessage::StateUpdate(initial) = &live[0] else { panic!("{:?}", live[0]) };
    assert_eq!(initial.phase, "idle");
    let last_state = live
        .iter()
        .rev()
        .find_map(|m| match m {
            ServerMessage::StateUpdate(v) => Some(v.clone()),
            _ => None,
        })
        .unwrap();
    assert_eq!(last_state.phase, "paused");
    let ticks = live.iter().filter(|m| matches!(m, ServerMessage::SpiralTick { .. })).count();
    assert_eq!(ticks, 6);

    // records are written before replies go out, so the log is complete here
    let log_path = dir.path().join("session-1-1.jsonl");
    let program = std::fs::read_to_string(dir.path().join("session-1-1.py")).unwrap();
    assert_eq!(program, VARIATION_1);
    let log = StrokeLog::read(&log_path).unwrap();
    assert_eq!(log.header.program, "variation1.py");
    let replayed = replay(&program, &log, Mode::Sketch, DriverConfig::default()).unwrap();
    assert_eq!(replayed.report.final_state.as_ref(), Some(&last_state));
    assert_eq!(replayed.messages, live);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn preload_and_protocol_errors() {
    let preload = Preload { name: "prog.py".into(), source: VARIATION_1.into(), mode: Mode::Wimp };
    let url = start(ServerConfig { driver: DriverConfig::default(), preload: Some(preload), record_dir: None }).await;
    let (mut ws, _) = tokio_tungstenite::connect_async(&url).await.unwrap();

    ws.send(Message::Text(r#"{"type":"wimp","name":"toggleBreakpoint","inputKind":"click","line":5}"#.into())).await.unwrap();
    ws.send(Message::Text(r#"{"type":"wimp","name":"start","inputKind":"keypress"}"#.into())).await.unwrap();
    ws.send(Message::Text(r#"{"type":"wimp","name":"st"#.into())).await.unwrap();
    ws.send(Message::Binary(vec![1, 2, 3])).await.unwrap();
    let msgs = drain(&mut ws).await;

    let lines: Vec<Option<u32>> = msgs
        .iter()
        .filter_map(|m| match m {
            ServerMessage::StateUpdate(v) => Some(v.current_line),
            _ => None,
        })
        .collect();
    assert_eq!(lines, vec![None, None, Some(5)]);
    let errors: Vec<&str> = msgs
        .iter()
        .filter_map(|m| match m {
            ServerMessage::Error { text } => Some(text.as_str()),
            _ => None,
        })
        .collect();
    assert_eq!(errors.len(), 2);
    assert!(errors[0].starts_with("parse error"));
    assert!(errors[1].contains("binary"));

    // a second connection gets its own session
    let (mut other, _) = tokio_tungstenite::connect_async(&url).await.unwrap();
    let fresh = drain(&mut other).await;
    assert!(matches!(&fresh[..], [ServerMessage::StateUpdate(v)] if v.breakpoints.is_empty()));
}
