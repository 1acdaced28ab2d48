//! Template matching for the six symbolic debugger gestures.
//!
//! Strokes go through [`crate::stroke::normalize_points`] and are compared to
//! pre-normalized templates by mean point distance. The alignment angle for
//! each template is refined with a golden-section search restricted to ±45°,
//! which keeps the L, mirrored L and caret shapes apart.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stroke::{self, BoundingBox, Stroke, Vec2, RESAMPLE_POINTS, SQUARE_SIZE};

pub const DEFAULT_THRESHOLD: f64 = 0.80;

const SEARCH_HALF_RANGE: f64 = 45.0 * std::f64::consts::PI / 180.0;
const SEARCH_PRECISION: f64 = 2.0 * std::f64::consts::PI / 180.0;
/// Bounding-box diagonal below which a stroke is treated as a tap.
const DEGENERATE_EXTENT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum GestureKind {
    Start,
    Stop,
    Continue,
    StepInto,
    StepOver,
    StepOut,
}

impl GestureKind {
    pub const ALL: [GestureKind; 6] = [
        GestureKind::Start,
        GestureKind::Stop,
        GestureKind::Continue,
        GestureKind::StepInto,
        GestureKind::StepOver,
        GestureKind::StepOut,
    ];

    /// Execution-flow gestures can be repeated with a spiral.
    pub fn is_execution_flow(self) -> bool {
        matches!(self, GestureKind::Continue | GestureKind::StepInto | GestureKind::StepOver | GestureKind::StepOut)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GestureKind::Start => "start",
            GestureKind::Stop => "stop",
            GestureKind::Continue => "continue",
            GestureKind::StepInto => "stepInto",
            GestureKind::StepOver => "stepOver",
            GestureKind::StepOut => "stepOut",
        }
    }
}

impl fmt::Display for GestureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GestureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GestureKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown gesture kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureTemplate {
    pub kind: GestureKind,
    pub points: Vec<Vec2>,
}

impl GestureTemplate {
    /// Normalizes a raw polyline into a template.
    pub fn from_polyline(kind: GestureKind, raw: &[Vec2]) -> Self {
        let (points, _) = stroke::normalize_points(raw, RESAMPLE_POINTS, SQUARE_SIZE);
        GestureTemplate { kind, points }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecognitionResult {
    pub kind: Option<GestureKind>,
    pub score: f64,
    pub accepted: bool,
}

impl RecognitionResult {
    fn rejected() -> Self {
        RecognitionResult { kind: None, score: 0.0, accepted: false }
    }

    /// The recognized kind, only when accepted.
    pub fn accepted_kind(&self) -> Option<GestureKind> {
        if self.accepted {
            self.kind
        } else {
            None
        }
    }
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("reading template file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing template file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("template {index} has {len} points, expected {expected}")]
    BadLength { index: usize, len: usize, expected: usize },
    #[error("template file has no template for `{0}`")]
    MissingKind(GestureKind),
}

pub mod shapes {
    //! Canonical polylines for each gesture, drawn on a 100 px canvas.

    use super::GestureKind;
    use crate::stroke::Vec2;

    fn arc(cx: f64, cy: f64, r: f64, from_deg: f64, to_deg: f64, steps: usize) -> Vec<Vec2> {
        (0..=steps)
            .map(|i| {
                let a = (from_deg + (to_deg - from_deg) * i as f64 / steps as f64).to_radians();
                // screen y grows downward, so a positive angle goes up
                Vec2::new(cx + r * a.cos(), cy - r * a.sin())
            })
            .collect()
    }

    /// Two stacked half-turns: over the top to the left, then around the
    /// right side and out at the lower left.
    pub fn s_curve() -> Vec<Vec2> {
        let mut pts = arc(50.0, 25.0, 25.0, 30.0, 270.0, 24);
        pts.extend(arc(50.0, 75.0, 25.0, 90.0, -150.0, 24).into_iter().skip(1));
        pts
    }

    pub fn rectangle() -> Vec<Vec2> {
        vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(100.0, 0.0),
            Vec2::new(100.0, 100.0),
            Vec2::new(0.0, 100.0),
            Vec2::new(0.0, 0.0),
        ]
    }

    /// Closed play-icon triangle with the apex pointing right.
    pub fn triangle() -> Vec<Vec2> {
        vec![Vec2::new(0.0, 0.0), Vec2::new(87.0, 50.0), Vec2::new(0.0, 100.0), Vec2::new(0.0, 0.0)]
    }

    pub fn caret() -> Vec<Vec2> {
        vec![Vec2::new(0.0, 100.0), Vec2::new(50.0, 0.0), Vec2::new(100.0, 100.0)]
    }

    pub fn l_shape() -> Vec<Vec2> {
        vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 100.0), Vec2::new(60.0, 100.0)]
    }

    pub fn mirrored_l() -> Vec<Vec2> {
        vec![Vec2::new(60.0, 0.0), Vec2::new(60.0, 100.0), Vec2::new(0.0, 100.0)]
    }

    pub fn for_kind(kind: GestureKind) -> Vec<Vec2> {
        match kind {
            GestureKind::Start => s_curve(),
            GestureKind::Stop => rectangle(),
            GestureKind::Continue => triangle(),
            GestureKind::StepInto => l_shape(),
            GestureKind::StepOver => caret(),
            GestureKind::StepOut => mirrored_l(),
        }
    }
}

/// One normalized template per gesture kind, procedurally generated.
pub fn template_library() -> Vec<GestureTemplate> {
    GestureKind::ALL
        .into_iter()
        .map(|k| GestureTemplate::from_polyline(k, &shapes::for_kind(k)))
        .collect()
}

pub fn templates_to_json(templates: &[GestureTemplate]) -> String {
    serde_json::to_string_pretty(templates).expect("templates serialize")
}

pub fn templates_from_json(text: &str) -> Result<Vec<GestureTemplate>, TemplateError> {
    let templates: Vec<GestureTemplate> = serde_json::from_str(text)?;
    for (index, t) in templates.iter().enumerate() {
        if t.points.len() != RESAMPLE_POINTS {
            return Err(TemplateError::BadLength { index, len: t.points.len(), expected: RESAMPLE_POINTS });
        }
    }
    for kind in GestureKind::ALL {
        if !templates.iter().any(|t| t.kind == kind) {
            return Err(TemplateError::MissingKind(kind));
        }
    }
    Ok(templates)
}

pub fn load_templates(path: &Path) -> Result<Vec<GestureTemplate>, TemplateError> {
    templates_from_json(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone)]
pub struct Recognizer {
    templates: Vec<GestureTemplate>,
    threshold: f64,
}

impl Default for Recognizer {
    fn default() -> Self {
        Recognizer::new(template_library(), DEFAULT_THRESHOLD)
    }
}

impl Recognizer {
    pub fn new(templates: Vec<GestureTemplate>, threshold: f64) -> Self {
        Recognizer { templates, threshold }
    }

    pub fn templates(&self) -> &[GestureTemplate] {
        &self.templates
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn recognize(&self, stroke: &Stroke) -> RecognitionResult {
        self.recognize_points(&stroke.xy())
    }

    pub fn recognize_points(&self, raw: &[Vec2]) -> RecognitionResult {
        if raw.len() < 2 || BoundingBox::of(raw).diagonal() < DEGENERATE_EXTENT {
            return RecognitionResult::rejected();
        }
        let (candidate, degenerate) = stroke::normalize_points(raw, RESAMPLE_POINTS, SQUARE_SIZE);
        if degenerate {
            return RecognitionResult::rejected();
        }

        let mut best: Option<(GestureKind, f64)> = None;
        for t in &self.templates {
            let d = distance_at_best_angle(&candidate, &t.points);
            // strict comparison keeps the earlier template on ties
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((t.kind, d));
            }
        }
        let Some((kind, distance)) = best else {
            return RecognitionResult::rejected();
        };
        let half_diagonal = 0.5 * (2.0 * SQUARE_SIZE * SQUARE_SIZE).sqrt();
        let score = (1.0 - distance / half_diagonal).max(0.0);
        RecognitionResult { kind: Some(kind), score, accepted: score >= self.threshold }
    }
}

fn distance_at_angle(points: &[Vec2], template: &[Vec2], theta: f64) -> f64 {
    let rotated = stroke::rotate_by(points, theta);
    stroke::path_distance(&rotated, template).unwrap_or(f64::INFINITY)
}

/// Golden-section search for the rotation minimizing path distance. The
/// unrotated alignment is also tried so exact matches score exactly.
pub fn distance_at_best_angle(points: &[Vec2], template: &[Vec2]) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (-SEARCH_HALF_RANGE, SEARCH_HALF_RANGE);
    let mut x1 = phi * a + (1.0 - phi) * b;
    let mut f1 = distance_at_angle(points, template, x1);
    let mut x2 = (1.0 - phi) * a + phi * b;
    let mut f2 = distance_at_angle(points, template, x2);
    while (b - a).abs() > SEARCH_PRECISION {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = phi * a + (1.0 - phi) * b;
            f1 = distance_at_angle(points, template, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = (1.0 - phi) * a + phi * b;
            f2 = distance_at_angle(points, template, x2);
        }
    }
    f1.min(f2).min(distance_at_angle(points, template, 0.0))
}
