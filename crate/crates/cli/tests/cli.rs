use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use sketchbug::protocol::log::StrokeLog;
use sketchbug::synth::scenario;

const BIN: &str = env!("CARGO_BIN_EXE_sketchdbg");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("RUST_LOG", "warn").output().expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_log(dir: &Path, name: &str, log: &StrokeLog) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, log.to_jsonl()).unwrap();
    path
}

#[test]
fn trace_oracle_format_matches_fixture() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["variation1", "variation2", "control_flow"] {
        let out = dir.path().join(format!("{name}.json"));
        let program = fixture(&format!("{name}.py"));
        let o = run(&["trace", "--program", program.to_str().unwrap(), "--out", out.to_str().unwrap(), "--format", "oracle"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(json(&out), json(&fixture(&format!("{name}.trace.json"))), "{name}");
    }
}

#[test]
fn trace_full_format_is_deterministic() {
    let program = fixture("variation1.py");
    let a = run(&["trace", "--program", program.to_str().unwrap()]);
    let b = run(&["trace", "--program", program.to_str().unwrap()]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["outcome"]["status"], "completed");
    assert_eq!(v["events"].as_array().unwrap().last().unwrap()["kind"], "end");
}

#[test]
fn trace_reports_syntax_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.py");
    std::fs::write(&bad, "x = (\n").unwrap();
    let o = run(&["trace", "--program", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("syntax error"));
}

#[test]
fn replay_reports_action_counts_per_mode() {
    let dir = tempfile::tempdir().unwrap();
    let source = std::fs::read_to_string(fixture("variation1.py")).unwrap();
    let program = fixture("variation1.py");
    let sketch = write_log(dir.path(), "s.jsonl", &scenario::traversal_sketch("variation1.py", &source, 5, scenario::TWENTY_STEP_SPIN_MS));
    let wimp = write_log(dir.path(), "w.jsonl", &scenario::traversal_wimp("variation1.py", &source, 5, 20));

    let out = dir.path().join("report.json");
    let o = run(&["replay", "--program", program.to_str().unwrap(), "--log", sketch.to_str().unwrap(), "--mode", "sketch", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out);
    assert_eq!(s["actions"], 3);
    assert_eq!(s["strokes"], 3);
    assert_eq!(s["finalPhase"], "paused");
    for key in ["clicks", "keypresses", "consoleText", "pausedLineHistory"] {
        assert!(s.get(key).is_some(), "{key}");
    }

    let o = run(&["replay", "--program", program.to_str().unwrap(), "--log", wimp.to_str().unwrap()]);
    assert!(o.status.success());
    let w: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((w["actions"].as_u64(), w["clicks"].as_u64(), w["keypresses"].as_u64()), (Some(22), Some(21), Some(1)));
    assert_eq!(w["pausedLineHistory"], s["pausedLineHistory"]);
}

#[test]
fn replay_writes_messages_and_rejects_wrong_mode() {
    let dir = tempfile::tempdir().unwrap();
    let source = std::fs::read_to_string(fixture("variation1.py")).unwrap();
    let program = fixture("variation1.py");
    let log = write_log(dir.path(), "s.jsonl", &scenario::traversal_sketch("variation1.py", &source, 5, 2_000.0));
    let msgs = dir.path().join("msgs.jsonl");
    let o = run(&["replay", "--program", program.to_str().unwrap(), "--log", log.to_str().unwrap(), "--messages", msgs.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&msgs).unwrap();
    assert!(text.lines().count() > 5);
    assert!(text.lines().any(|l| l.contains("\"spiralTick\"")));

    let o = run(&["replay", "--program", program.to_str().unwrap(), "--log", log.to_str().unwrap(), "--mode", "wimp"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("mode"));

    let other = fixture("variation2.py");
    let o = run(&["replay", "--program", other.to_str().unwrap(), "--log", log.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not match"));
}

#[test]
fn spiral_flags_change_replay() {
    let dir = tempfile::tempdir().unwrap();
    let source = std::fs::read_to_string(fixture("variation1.py")).unwrap();
    let program = fixture("variation1.py");
    let log = write_log(dir.path(), "s.jsonl", &scenario::traversal_sketch("variation1.py", &source, 5, 4_000.0));
    let history = |extra: &[&str]| {
        let mut args = vec!["replay", "--program", program.to_str().unwrap(), "--log", log.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = run(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["pausedLineHistory"].as_array().unwrap().len()
    };
    let base = history(&[]);
    assert!(history(&["--spiral-degrees-per-step", "360"]) < base);
    assert!(history(&["--spiral-max-rate", "1"]) < base);
    let o = run(&["replay", "--program", program.to_str().unwrap(), "--log", log.to_str().unwrap(), "--spiral-max-rate", "0"]);
    assert!(!o.status.success());
}

#[test]
fn analyze_writes_ci_and_wilcoxon() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("pairs.csv");
    std::fs::write(&csv, "id,sketch,wimp\np1,20,55\np2,18,60\np3,25,49\np4,30,70\np5,22,58\np6,19,41\np7,27,66\np8,24,52\n").unwrap();
    let out = dir.path().join("stats.json");
    let args = ["analyze", "--pairs", csv.to_str().unwrap(), "--boot", "2000", "--alpha", "0.05", "--seed", "42", "--out", out.to_str().unwrap()];
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&out);
    assert_eq!(v["measure"], "actions");
    assert_eq!(v["n"], 8);
    assert!((v["meanDiff"].as_f64().unwrap() + 33.25).abs() < 1e-9);
    assert!(v["ci"]["low"].as_f64().unwrap() < v["ci"]["high"].as_f64().unwrap());
    assert!(v["ci"]["high"].as_f64().unwrap() < 0.0);
    assert_eq!(v["W"], 0.0);
    assert_eq!(v["wilcoxon"]["method"], "exact");
    assert!((v["p"].as_f64().unwrap() - 2.0 / 256.0).abs() < 1e-12);
    let first = std::fs::read(&out).unwrap();
    assert!(run(&args).status.success());
    assert_eq!(std::fs::read(&out).unwrap(), first);
}

#[test]
fn analyze_rejects_bad_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("pairs.csv");
    std::fs::write(&csv, "id,sketch,wimp\np1,20,x\n").unwrap();
    let o = run(&["analyze", "--pairs", csv.to_str().unwrap()]);
    assert!(!o.status.success());
    std::fs::write(&csv, "id,sketch,wimp\np1,3,3\np2,4,4\np3,5,5\n").unwrap();
    let o = run(&["analyze", "--pairs", csv.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("zero variance"));
}

#[test]
fn templates_subcommand_matches_shipped_asset() {
    let o = run(&["templates"]);
    assert!(o.status.success());
    let shipped = include_str!("../../core/assets/templates.json");
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim_end(), shipped.trim_end());
}

#[test]
fn serve_binds_and_rejects_bad_program() {
    let mut child = Command::new(BIN)
        .args(["serve", "--port", "0", "--program", fixture("variation1.py").to_str().unwrap()])
        .env("RUST_LOG", "warn")
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut line).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(line.starts_with("listening on ws://127.0.0.1:"), "{line}");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.py");
    std::fs::write(&bad, "def f(:\n").unwrap();
    let o = run(&["serve", "--port", "0", "--program", bad.to_str().unwrap()]);
    assert!(!o.status.success());
}
