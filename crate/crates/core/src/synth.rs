//! Synthetic pen input: timed polylines, dwells, spirals and tremor. Used by
//! the test suites, the benches and the `sketchdbg` demo logs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gutter::{GutterGeometry, Line};
use crate::recognizer::{shapes, GestureKind};
use crate::stroke::{Point, Vec2};

/// Sampling interval of generated input, in ms.
pub const SAMPLE_MS: f64 = 10.0;
/// Radial growth of generated spirals per revolution, in px.
pub const SPIRAL_GROWTH: f64 = 20.0;

fn sample_times(t0: f64, duration: f64) -> impl Iterator<Item = f64> {
    let n = (duration / SAMPLE_MS).round() as usize;
    (0..=n).map(move |i| t0 + i as f64 * SAMPLE_MS)
}

/// Canonical gesture shape scaled to `size` px with its top-left at (x, y).
pub fn shape_at(kind: GestureKind, x: f64, y: f64, size: f64) -> Vec<Vec2> {
    shapes::for_kind(kind).into_iter().map(|p| Vec2::new(x + p.x * size / 100.0, y + p.y * size / 100.0)).collect()
}

pub fn caret_at(x: f64, y: f64) -> Vec<Vec2> {
    shape_at(GestureKind::StepOver, x, y, 60.0)
}

/// Traces `poly` at constant speed, first sample at `t0`, last at `t0 + duration`.
pub fn polyline(poly: &[Vec2], t0: f64, duration: f64) -> Vec<Point> {
    let total: f64 = poly.windows(2).map(|w| w[0].distance(w[1])).sum();
    let mut out = Vec::new();
    for t in sample_times(t0, duration) {
        let target = if duration > 0.0 { total * (t - t0) / duration } else { 0.0 };
        let mut covered = 0.0;
        let mut pos = *poly.last().unwrap();
        for w in poly.windows(2) {
            let len = w[0].distance(w[1]);
            if covered + len >= target && len > 0.0 {
                let f = (target - covered) / len;
                pos = Vec2::new(w[0].x + f * (w[1].x - w[0].x), w[0].y + f * (w[1].y - w[0].y));
                break;
            }
            covered += len;
        }
        out.push(Point::new(pos.x, pos.y, t));
    }
    out
}

/// Stationary samples at `p` from `t0` to `t0 + duration`.
pub fn hold(p: Point, t0: f64, duration: f64) -> Vec<Point> {
    sample_times(t0, duration).map(|t| Point::new(p.x, p.y, t)).collect()
}

/// Archimedean spiral growing out of `start`, sampled after `start.t` for
/// `duration` ms. Clockwise is as seen on a y-down screen.
pub fn spiral(start: Point, rev_per_sec: f64, duration: f64, clockwise: bool) -> Vec<Point> {
    let sign = if clockwise { 1.0 } else { -1.0 };
    sample_times(start.t, duration)
        .skip(1)
        .map(|t| {
            let phi = std::f64::consts::TAU * rev_per_sec * (t - start.t) / 1000.0;
            let r = SPIRAL_GROWTH * phi / std::f64::consts::TAU;
            let a = sign * phi;
            // with y pointing down, increasing `a` turns clockwise
            Point::new(start.x + r * a.cos(), start.y + r * a.sin(), t)
        })
        .collect()
}

/// Circle of radius `r` around `center`, starting at its leftmost point.
pub fn circle(center: Vec2, r: f64, t0: f64, rev_per_sec: f64, duration: f64, clockwise: bool) -> Vec<Point> {
    let sign = if clockwise { 1.0 } else { -1.0 };
    sample_times(t0, duration)
        .map(|t| {
            let a = std::f64::consts::PI + sign * std::f64::consts::TAU * rev_per_sec * (t - t0) / 1000.0;
            Point::new(center.x + r * a.cos(), center.y + r * a.sin(), t)
        })
        .collect()
}

/// Random jitter of at most `amplitude` px around `p`.
pub fn tremor(p: Point, t0: f64, duration: f64, amplitude: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_times(t0, duration)
        .map(|t| Point::new(p.x + rng.gen_range(-amplitude..=amplitude), p.y + rng.gen_range(-amplitude..=amplitude), t))
        .collect()
}

/// Short vertical tick centred on `line`'s row, in the middle of the gutter.
pub fn gutter_tick(geometry: &GutterGeometry, line: Line, t0: f64) -> Vec<Point> {
    let x = (geometry.x_min + geometry.x_max) / 2.0;
    let y = geometry.row_center(line);
    let half = geometry.line_height * 0.2;
    polyline(&[Vec2::new(x, y - half), Vec2::new(x, y + half)], t0, 80.0)
}

/// Vertical sweep down the gutter from the top of `first` to the bottom of `last`.
pub fn gutter_sweep(geometry: &GutterGeometry, first: Line, last: Line, t0: f64) -> Vec<Point> {
    let x = (geometry.x_min + geometry.x_max) / 2.0;
    let top = geometry.row_center(first) - geometry.line_height * 0.4;
    let bottom = geometry.row_center(last) + geometry.line_height * 0.4;
    polyline(&[Vec2::new(x, top), Vec2::new(x, bottom)], t0, 300.0)
}

/// Base gesture drawn in `draw_ms`, a still pause of `hold_ms`, then a
/// clockwise spiral at `rev_per_sec` for `spin_ms`. One continuous pen-down.
pub fn gesture_then_spiral(
    kind: GestureKind,
    x: f64,
    y: f64,
    t0: f64,
    draw_ms: f64,
    hold_ms: f64,
    rev_per_sec: f64,
    spin_ms: f64,
) -> Vec<Point> {
    let mut pts = polyline(&shape_at(kind, x, y, 60.0), t0, draw_ms);
    let end = *pts.last().unwrap();
    pts.extend(hold(end, end.t, hold_ms).into_iter().skip(1));
    let rest = *pts.last().unwrap();
    pts.extend(spiral(rest, rev_per_sec, spin_ms, true));
    pts
}

pub mod scenario {
    //! Scripted sessions over a program, as stroke logs.

    use super::*;
    use crate::protocol::log::{LogHeader, StrokeLog};
    use crate::protocol::{ClientMessage, WimpInput};
    use crate::session::Mode;
    use crate::stroke::Pointer;

    /// Spin time at 1 rev/s that yields 19 ticks after the base caret
    /// command, for 20 step-overs in total.
    pub const TWENTY_STEP_SPIN_MS: f64 = 9_750.0;

    fn stroke(id: u64, points: Vec<Point>) -> ClientMessage {
        ClientMessage::Stroke { id, pointer: Pointer::Pen, points }
    }

    /// Sketch mode: one gutter tick on `line`, an 'S' to start, then one
    /// caret stroke whose spiral keeps stepping over.
    pub fn traversal_sketch(name: &str, source: &str, line: Line, spin_ms: f64) -> StrokeLog {
        let geometry = GutterGeometry::default();
        let mut log = StrokeLog::new(LogHeader::new(name, source, Mode::Sketch, geometry));
        log.records.push(stroke(1, gutter_tick(&geometry, line, 1_000.0)));
        log.records.push(stroke(2, polyline(&shape_at(GestureKind::Start, 200.0, 100.0, 80.0), 2_000.0, 600.0)));
        log.records.push(stroke(3, gesture_then_spiral(GestureKind::StepOver, 200.0, 300.0, 4_000.0, 400.0, 400.0, 1.0, spin_ms)));
        log
    }

    /// WIMP mode: a breakpoint click, F5, then `steps` step-over clicks.
    pub fn traversal_wimp(name: &str, source: &str, line: Line, steps: usize) -> StrokeLog {
        let mut log = StrokeLog::new(LogHeader::new(name, source, Mode::Wimp, GutterGeometry::default()));
        let wimp = |name: &str, input_kind, line, t| ClientMessage::WimpCommand { name: name.into(), input_kind, line, t: Some(t) };
        log.records.push(wimp("toggleBreakpoint", WimpInput::Click, Some(line), 1_000.0));
        log.records.push(wimp("start", WimpInput::Keypress, None, 2_000.0));
        for i in 0..steps {
            log.records.push(wimp("stepOver", WimpInput::Click, None, 3_000.0 + 700.0 * i as f64));
        }
        log
    }
}
