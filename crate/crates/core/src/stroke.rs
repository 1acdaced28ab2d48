//! Stroke data model and the geometric normalization steps used before
//! template matching.
//!
//! Coordinates are editor pixels with y growing downward. Angles returned by
//! [`indicative_angle`] and consumed by [`rotate_by`] are measured so that a
//! positive angle is counterclockwise *on screen*: a first point straight above
//! the centroid has angle `+π/2`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of points every stroke is resampled to before matching.
pub const RESAMPLE_POINTS: usize = 64;
/// Side of the reference square strokes are scaled into.
pub const SQUARE_SIZE: f64 = 250.0;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("point lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("empty point list")]
    Empty,
}

/// A 2-D position without timing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn sub(self, other: Vec2) -> Vec2 {
        Vec2::new(self.x - other.x, self.y - other.y)
    }

    pub fn len(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// z-component of the 2-D cross product. Positive means `other` is turned
    /// clockwise from `self` on a y-down screen.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2 { x, y }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

/// A sampled pen or mouse position. `t` is milliseconds since session epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        Point { x, y, t }
    }

    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

impl From<[f64; 3]> for Point {
    fn from([x, y, t]: [f64; 3]) -> Self {
        Point { x, y, t }
    }
}

impl From<Point> for [f64; 3] {
    fn from(p: Point) -> Self {
        [p.x, p.y, p.t]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pointer {
    Pen,
    Mouse,
}

pub type StrokeId = u64;

/// One pen-down to pen-up trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    pub id: StrokeId,
    pub pointer: Pointer,
    pub points: Vec<Point>,
}

impl Stroke {
    pub fn new(id: StrokeId, pointer: Pointer, points: Vec<Point>) -> Self {
        Stroke { id, pointer, points }
    }

    pub fn xy(&self) -> Vec<Vec2> {
        self.points.iter().map(|p| p.xy()).collect()
    }

    pub fn path_length(&self) -> f64 {
        polyline_length(&self.xy())
    }

    /// Width and height of the bounding box.
    pub fn extent(&self) -> (f64, f64) {
        let b = BoundingBox::of(&self.xy());
        (b.width(), b.height())
    }
}

/// A stroke after the full normalization chain.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedStroke {
    pub points: Vec<Vec2>,
    pub source_id: StrokeId,
    /// Set when the input had no measurable length and was replicated.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Vec2,
    pub max: Vec2,
}

impl BoundingBox {
    pub fn of(points: &[Vec2]) -> BoundingBox {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        BoundingBox { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }
}

pub fn polyline_length(points: &[Vec2]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Resamples `points` to `n` points equally spaced by arc length. The first
/// and last input points are kept exactly. The boolean is `true` when the
/// polyline has zero length and the result is `n` copies of the first point.
pub fn resample_points(points: &[Vec2], n: usize) -> (Vec<Vec2>, bool) {
    assert!(n >= 2, "resample count must be at least 2");
    assert!(!points.is_empty(), "cannot resample an empty stroke");

    let total = polyline_length(points);
    if total <= 0.0 {
        return (vec![points[0]; n], true);
    }

    let interval = total / (n - 1) as f64;
    let mut out = Vec::with_capacity(n);
    out.push(points[0]);

    // walk segments once; `covered` is the arc length at the start of segment `seg`
    let mut seg = 0;
    let mut covered = 0.0;
    for k in 1..n - 1 {
        let target = interval * k as f64;
        loop {
            let a = points[seg];
            let b = points[seg + 1];
            let len = a.distance(b);
            if covered + len >= target || seg + 2 == points.len() {
                let frac = if len > 0.0 { ((target - covered) / len).clamp(0.0, 1.0) } else { 0.0 };
                out.push(Vec2::new(a.x + frac * (b.x - a.x), a.y + frac * (b.y - a.y)));
                break;
            }
            covered += len;
            seg += 1;
        }
    }
    out.push(*points.last().unwrap());
    (out, false)
}

/// Resamples a stroke; see [`resample_points`].
pub fn resample(stroke: &Stroke, n: usize) -> (Vec<Vec2>, bool) {
    resample_points(&stroke.xy(), n)
}

pub fn centroid(points: &[Vec2]) -> Vec2 {
    assert!(!points.is_empty(), "centroid of an empty point list");
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Vec2::new(sx / n, sy / n)
}

/// Angle from the centroid to the first point, in `(-π, π]`, counterclockwise
/// on screen. Returns 0 when the first point coincides with the centroid.
pub fn indicative_angle(points: &[Vec2]) -> f64 {
    let c = centroid(points);
    let p = points[0];
    let (dx, dy) = (p.x - c.x, c.y - p.y);
    if dx == 0.0 && dy == 0.0 {
        return 0.0;
    }
    let a = dy.atan2(dx);
    // atan2 yields [-π, π]; fold -π onto π
    if a <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        a
    }
}

/// Rigid rotation about the centroid, counterclockwise on screen by `theta`.
pub fn rotate_by(points: &[Vec2], theta: f64) -> Vec<Vec2> {
    if theta == 0.0 {
        return points.to_vec();
    }
    let c = centroid(points);
    let (sin, cos) = theta.sin_cos();
    points
        .iter()
        .map(|p| {
            let dx = p.x - c.x;
            let dy = p.y - c.y;
            Vec2::new(dx * cos + dy * sin + c.x, -dx * sin + dy * cos + c.y)
        })
        .collect()
}

/// Non-uniform scale of the bounding box onto `size`×`size`. A zero width or
/// height is treated as 1 px so straight strokes do not divide by zero.
pub fn scale_to_square(points: &[Vec2], size: f64) -> Vec<Vec2> {
    let b = BoundingBox::of(points);
    let w = if b.width() > 0.0 { b.width() } else { 1.0 };
    let h = if b.height() > 0.0 { b.height() } else { 1.0 };
    points
        .iter()
        .map(|p| Vec2::new((p.x - b.min.x) * size / w, (p.y - b.min.y) * size / h))
        .collect()
}

pub fn translate_to_origin(points: &[Vec2]) -> Vec<Vec2> {
    let c = centroid(points);
    points.iter().map(|p| p.sub(c)).collect()
}

/// Mean pairwise Euclidean distance between two equally long point lists.
pub fn path_distance(a: &[Vec2], b: &[Vec2]) -> Result<f64, GeometryError> {
    if a.len() != b.len() {
        return Err(GeometryError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(GeometryError::Empty);
    }
    let sum: f64 = a.iter().zip(b).map(|(p, q)| p.distance(*q)).sum();
    Ok(sum / a.len() as f64)
}

/// Resample, rotate the indicative angle to zero, scale to the reference
/// square and move the centroid to the origin.
pub fn normalize_points(points: &[Vec2], n: usize, size: f64) -> (Vec<Vec2>, bool) {
    let (resampled, degenerate) = resample_points(points, n);
    if degenerate {
        return (vec![Vec2::default(); n], true);
    }
    let angle = indicative_angle(&resampled);
    let rotated = rotate_by(&resampled, -angle);
    let scaled = scale_to_square(&rotated, size);
    (translate_to_origin(&scaled), false)
}

pub fn normalize(stroke: &Stroke) -> NormalizedStroke {
    let (points, degenerate) = normalize_points(&stroke.xy(), RESAMPLE_POINTS, SQUARE_SIZE);
    NormalizedStroke { points, source_id: stroke.id, degenerate }
}
