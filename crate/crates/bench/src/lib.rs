//! Shared inputs for the benchmarks.

use sketchbug::protocol::log::StrokeLog;
use sketchbug::recognizer::{shapes, GestureKind};
use sketchbug::stats::PairedSamples;
use sketchbug::stroke::{Point, Pointer, Stroke};
use sketchbug::synth::{self, scenario};

pub const VARIATION_1: &str = include_str!("../../core/tests/fixtures/variation1.py");
pub const VARIATION_2: &str = include_str!("../../core/tests/fixtures/variation2.py");

/// A canonical gesture drawn as a timed pen stroke.
pub fn gesture_stroke(kind: GestureKind) -> Stroke {
    let raw = shapes::for_kind(kind);
    let points = synth::polyline(&raw, 0.0, 500.0);
    Stroke::new(1, Pointer::Pen, points)
}

/// Caret, dwell, then `spin_ms` of clockwise spiral at 1 rev/s.
pub fn spiral_points(spin_ms: f64) -> Vec<Point> {
    synth::gesture_then_spiral(GestureKind::StepOver, 200.0, 300.0, 0.0, 400.0, 400.0, 1.0, spin_ms)
}

pub fn traversal_log() -> StrokeLog {
    scenario::traversal_sketch("variation1.py", VARIATION_1, 5, scenario::TWENTY_STEP_SPIN_MS)
}

/// Deterministic paired measurements with a negative shift and no ties.
pub fn sample_pairs(n: usize) -> PairedSamples {
    let wimp: Vec<f64> = (0..n).map(|i| 50.0 + ((i * 37) % 23) as f64 + i as f64 * 0.01).collect();
    let sketch: Vec<f64> = wimp.iter().enumerate().map(|(i, w)| w - 30.0 + ((i * 53) % 17) as f64 * 1.3).collect();
    PairedSamples::new(sketch, wimp).expect("equal lengths")
}
