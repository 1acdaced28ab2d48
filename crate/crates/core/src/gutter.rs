//! Breakpoint marks drawn over the line-number gutter.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::stroke::{BoundingBox, Stroke};

/// Fraction of a stroke's points that must fall inside the gutter band.
pub const GUTTER_CONTAINMENT: f64 = 0.8;

pub type Line = u32;

/// Pixel layout of the gutter as measured by the client.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GutterGeometry {
    pub x_min: f64,
    pub x_max: f64,
    pub line_height: f64,
    pub top_offset: f64,
    pub first_line: Line,
    pub line_count: u32,
}

impl Default for GutterGeometry {
    fn default() -> Self {
        GutterGeometry { x_min: 0.0, x_max: 48.0, line_height: 20.0, top_offset: 0.0, first_line: 1, line_count: 200 }
    }
}

impl GutterGeometry {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.x_min < self.x_max) {
            return Err(format!("gutter xMin {} must be below xMax {}", self.x_min, self.x_max));
        }
        if !(self.line_height > 0.0) {
            return Err(format!("gutter lineHeight {} must be positive", self.line_height));
        }
        if self.line_count == 0 || self.first_line == 0 {
            return Err("gutter must cover at least one 1-based line".into());
        }
        Ok(())
    }

    pub fn last_line(&self) -> Line {
        self.first_line + self.line_count - 1
    }

    /// Line whose row contains pixel row `y`, clamped to the visible range.
    pub fn line_at(&self, y: f64) -> Line {
        let row = ((y - self.top_offset) / self.line_height).floor();
        let max_row = (self.line_count - 1) as f64;
        self.first_line + row.clamp(0.0, max_row) as Line
    }

    /// Vertical center of a line's row, in pixels.
    pub fn row_center(&self, line: Line) -> f64 {
        self.top_offset + (line - self.first_line) as f64 * self.line_height + self.line_height / 2.0
    }

    pub fn contains_x(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }
}

/// Inclusive range of source lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineRange {
    pub first: Line,
    pub last: Line,
}

impl LineRange {
    pub fn new(first: Line, last: Line) -> Self {
        LineRange { first: first.min(last), last: first.max(last) }
    }

    pub fn single(line: Line) -> Self {
        LineRange { first: line, last: line }
    }

    pub fn is_single(&self) -> bool {
        self.first == self.last
    }

    pub fn contains(&self, line: Line) -> bool {
        line >= self.first && line <= self.last
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BreakpointUpdate {
    pub set: BTreeSet<Line>,
    pub cleared: BTreeSet<Line>,
    pub warning: Option<String>,
}

impl BreakpointUpdate {
    pub fn is_noop(&self) -> bool {
        self.set.is_empty() && self.cleared.is_empty()
    }

    pub fn apply(&self, breakpoints: &mut BTreeSet<Line>) {
        for l in &self.cleared {
            breakpoints.remove(l);
        }
        breakpoints.extend(self.set.iter().copied());
    }
}

pub fn is_gutter_stroke(stroke: &Stroke, geometry: &GutterGeometry) -> bool {
    if stroke.points.is_empty() {
        return false;
    }
    let inside = stroke.points.iter().filter(|p| geometry.contains_x(p.x)).count();
    inside as f64 >= GUTTER_CONTAINMENT * stroke.points.len() as f64
}

/// Rows covered by the vertical extent of the stroke.
pub fn lines_spanned(stroke: &Stroke, geometry: &GutterGeometry) -> LineRange {
    let b = BoundingBox::of(&stroke.xy());
    LineRange::new(geometry.line_at(b.min.y), geometry.line_at(b.max.y))
}

/// Interprets a gutter mark over `range`.
///
/// A single-line mark toggles the breakpoint at that line, snapping a new
/// breakpoint to an executable neighbour within one line (the following line
/// is preferred). A mark spanning several lines clears every breakpoint it
/// crosses and never adds any.
pub fn apply_gutter_mark(range: LineRange, breakpoints: &BTreeSet<Line>, executable: &BTreeSet<Line>) -> BreakpointUpdate {
    let mut update = BreakpointUpdate::default();

    if range.is_single() {
        let line = range.first;
        if breakpoints.contains(&line) {
            update.cleared.insert(line);
            return update;
        }
        let candidates = [Some(line), line.checked_add(1), line.checked_sub(1)];
        match candidates.into_iter().flatten().find(|l| executable.contains(l)) {
            Some(target) if breakpoints.contains(&target) => {
                update.cleared.insert(target);
            }
            Some(target) => {
                update.set.insert(target);
            }
            None => update.warning = Some(format!("No executable line near line {line}; breakpoint not set")),
        }
        return update;
    }

    update.cleared = breakpoints.iter().copied().filter(|l| range.contains(*l)).collect();
    if update.cleared.is_empty() {
        update.warning = Some(format!("No breakpoints between lines {} and {} to clear", range.first, range.last));
    }
    update
}
