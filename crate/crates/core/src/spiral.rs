//! Online dwell detection and spiral repetition.
//!
//! While the pen is down, every sample goes through [`SpiralState::feed_point`].
//! Once the pen has rested inside `dwell_radius` for `dwell_duration`, the
//! caller recognizes the stroke drawn so far and calls [`SpiralState::lock`].
//! If the base gesture is an execution-flow command, further clockwise
//! turning of the pen path is converted into step ticks: one per
//! `degrees_per_step` of accumulated turning, at most `max_steps_per_second`.
//!
//! Turning is the signed angle between successive displacement vectors
//! (clockwise positive on a y-down screen). Displacements shorter than
//! `min_segment` are merged into the next sample so tremor does not register
//! as rotation, and nothing accrues while the pen has moved less than
//! `pause_radius` over the trailing `pause_window`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::recognizer::GestureKind;
use crate::stroke::{Point, Vec2};

const ANGLE_EPS: f64 = 1e-6;
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SpiralParams {
    pub dwell_radius: f64,
    pub dwell_duration: f64,
    pub degrees_per_step: f64,
    pub max_steps_per_second: f64,
    pub pause_window: f64,
    /// Movement below this radius over `pause_window` counts as a pause.
    pub pause_radius: f64,
    pub min_segment: f64,
}

impl Default for SpiralParams {
    fn default() -> Self {
        SpiralParams {
            dwell_radius: 10.0,
            dwell_duration: 300.0,
            degrees_per_step: 180.0,
            max_steps_per_second: 4.0,
            pause_window: 150.0,
            pause_radius: 3.0,
            min_segment: 2.0,
        }
    }
}

impl SpiralParams {
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("dwellRadius", self.dwell_radius),
            ("dwellDuration", self.dwell_duration),
            ("degreesPerStep", self.degrees_per_step),
            ("maxStepsPerSecond", self.max_steps_per_second),
            ("pauseWindow", self.pause_window),
            ("pauseRadius", self.pause_radius),
            ("minSegment", self.min_segment),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("spiral parameter {name} must be positive, got {v}"));
            }
        }
        Ok(())
    }

    fn min_step_interval(&self) -> f64 {
        1000.0 / self.max_steps_per_second
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpiralMode {
    BaseDrawing,
    Dwelling,
    Spinning,
    Dead,
}

#[derive(Debug, Error, PartialEq)]
pub enum SpiralError {
    #[error("point at t={got} arrived after t={last}")]
    OutOfOrder { last: f64, got: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FeedOutcome {
    pub ticks: u32,
    pub dwell_detected: bool,
}

/// Per-stroke controller state.
#[derive(Debug, Clone)]
pub struct SpiralState {
    pub mode: SpiralMode,
    pub dwell_anchor: Option<Point>,
    pub dwell_start: Option<f64>,
    pub accumulated_deg: f64,
    pub steps_emitted: u32,
    pub last_step_at: Option<f64>,
    pub base_kind: Option<GestureKind>,

    recent: VecDeque<Point>,
    last_t: Option<f64>,
    // dwell anchor of a failed lock; dwell re-arms once the pen leaves it
    rearm_anchor: Option<Vec2>,
    locked_at: f64,
    // pen position when spinning began
    spin_origin: Option<Vec2>,
    seg_anchor: Option<Vec2>,
    prev_dir: Option<Vec2>,
    departed: bool,
    // turning recorded before the pen first leaves the dwell disc
    pending_deg: f64,
}

impl Default for SpiralState {
    fn default() -> Self {
        SpiralState::new()
    }
}

impl SpiralState {
    pub fn new() -> Self {
        SpiralState {
            mode: SpiralMode::BaseDrawing,
            dwell_anchor: None,
            dwell_start: None,
            accumulated_deg: 0.0,
            steps_emitted: 0,
            last_step_at: None,
            base_kind: None,
            recent: VecDeque::new(),
            last_t: None,
            rearm_anchor: None,
            locked_at: 0.0,
            spin_origin: None,
            seg_anchor: None,
            prev_dir: None,
            departed: false,
            pending_deg: 0.0,
        }
    }

    pub fn is_spinning(&self) -> bool {
        self.mode == SpiralMode::Spinning
    }

    pub fn feed_point(&mut self, p: Point, params: &SpiralParams) -> Result<FeedOutcome, SpiralError> {
        if let Some(last) = self.last_t {
            if p.t < last {
                return Err(SpiralError::OutOfOrder { last, got: p.t });
            }
        }
        self.last_t = Some(p.t);
        if self.mode == SpiralMode::Dead {
            return Ok(FeedOutcome::default());
        }

        self.recent.push_back(p);
        let horizon = params.dwell_duration.max(params.pause_window);
        // keep one sample at or before the horizon so the window can be anchored
        while self.recent.len() >= 2 && self.recent[1].t <= p.t - horizon {
            self.recent.pop_front();
        }

        match self.mode {
            SpiralMode::BaseDrawing => {
                if let Some(anchor) = self.rearm_anchor {
                    if p.xy().distance(anchor) > params.dwell_radius {
                        self.rearm_anchor = None;
                    }
                }
                if self.rearm_anchor.is_none() {
                    if let Some(anchor) = self.still_window(p.t, params.dwell_duration, params.dwell_radius, f64::NEG_INFINITY) {
                        self.mode = SpiralMode::Dwelling;
                        self.dwell_anchor = Some(anchor);
                        self.dwell_start = Some(anchor.t);
                        return Ok(FeedOutcome { ticks: 0, dwell_detected: true });
                    }
                }
                Ok(FeedOutcome::default())
            }
            SpiralMode::Dwelling => Ok(FeedOutcome::default()),
            SpiralMode::Spinning => Ok(FeedOutcome { ticks: self.spin(p, params), dwell_detected: false }),
            SpiralMode::Dead => unreachable!(),
        }
    }

    /// Resolves a detected dwell with the recognized base gesture. Only
    /// execution-flow gestures start spinning; anything else returns to base
    /// drawing until the pen moves away from the dwell point.
    pub fn lock(&mut self, kind: Option<GestureKind>) {
        if self.mode != SpiralMode::Dwelling {
            return;
        }
        let anchor = self.dwell_anchor.expect("dwelling implies an anchor");
        match kind {
            Some(k) if k.is_execution_flow() => {
                let now = self.last_t.unwrap_or(anchor.t);
                self.mode = SpiralMode::Spinning;
                self.base_kind = Some(k);
                self.locked_at = now;
                // the base command itself counts against the rate cap
                self.last_step_at = Some(now);
                self.spin_origin = self.recent.back().map(|p| p.xy());
                self.seg_anchor = self.spin_origin;
                self.prev_dir = None;
                self.departed = false;
                self.pending_deg = 0.0;
                self.accumulated_deg = 0.0;
            }
            _ => {
                self.mode = SpiralMode::BaseDrawing;
                self.rearm_anchor = Some(anchor.xy());
                self.dwell_anchor = None;
                self.dwell_start = None;
            }
        }
    }

    /// Pen lifted, or the program ended. Residual turning is discarded.
    pub fn finish(&mut self) {
        self.mode = SpiralMode::Dead;
        self.accumulated_deg = 0.0;
        self.pending_deg = 0.0;
    }

    /// Returns the window's first sample if every sample in the trailing
    /// `window` ms lies within `radius` of it. The anchor must not be older
    /// than `not_before`.
    fn still_window(&self, now: f64, window: f64, radius: f64, not_before: f64) -> Option<Point> {
        let idx = self.recent.iter().rposition(|q| q.t <= now - window)?;
        let anchor = self.recent[idx];
        if anchor.t < not_before {
            return None;
        }
        self.recent
            .iter()
            .skip(idx + 1)
            .all(|q| q.xy().distance(anchor.xy()) <= radius)
            .then_some(anchor)
    }

    fn spin(&mut self, p: Point, params: &SpiralParams) -> u32 {
        let here = p.xy();
        let origin = self.spin_origin.unwrap_or(here);
        let paused = self.departed && self.still_window(p.t, params.pause_window, params.pause_radius, self.locked_at).is_some();

        let mut turn = 0.0;
        match self.seg_anchor {
            None => self.seg_anchor = Some(here),
            Some(from) => {
                let dir = here.sub(from);
                if dir.len() >= params.min_segment {
                    if let Some(prev) = self.prev_dir {
                        turn = prev.cross(dir).atan2(prev.dot(dir)).to_degrees();
                    }
                    self.prev_dir = Some(dir);
                    self.seg_anchor = Some(here);
                }
            }
        }

        if !self.departed {
            self.pending_deg = (self.pending_deg + turn).max(0.0);
            if here.distance(origin) > params.dwell_radius {
                self.departed = true;
                self.accumulated_deg = self.pending_deg;
                self.pending_deg = 0.0;
            }
        } else if paused {
            self.prev_dir = None;
        } else {
            self.accumulated_deg = (self.accumulated_deg + turn).max(0.0);
        }
        if !self.departed {
            return 0;
        }

        let step = params.degrees_per_step;
        if self.accumulated_deg + ANGLE_EPS < step {
            return 0;
        }
        let allowed = self.last_step_at.is_none_or(|last| p.t - last + TIME_EPS >= params.min_step_interval());
        if allowed {
            self.accumulated_deg = (self.accumulated_deg - step).max(0.0);
            self.steps_emitted += 1;
            self.last_step_at = Some(p.t);
            1
        } else {
            // at most one step may wait for the rate cap; the rest is dropped
            self.accumulated_deg = self.accumulated_deg.min(step);
            0
        }
    }
}
