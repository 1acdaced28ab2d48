//! Pen-gesture debugger for a small Python subset: ink recognition, gutter
//! breakpoints, spiral repetition, a pre-executing tracer, the debugging
//! session state machine, the WebSocket protocol and paired-study statistics.

pub mod engine;
pub mod gutter;
pub mod lang;
pub mod protocol;
pub mod recognizer;
pub mod session;
pub mod spiral;
pub mod stats;
pub mod stroke;
pub mod synth;

pub use engine::{build_trace, Limits, Program, Trace, TraceEvent, VarValue};
pub use gutter::{GutterGeometry, LineRange};
pub use lang::{Line, SyntaxError};
pub use recognizer::{GestureKind, RecognitionResult, Recognizer};
pub use session::{DebugCommand, Mode, Phase, Session, StateView};
pub use spiral::{SpiralParams, SpiralState};
pub use stats::{bootstrap_ci_studentized, mean_difference, wilcoxon_signed_rank, PairedSamples};
pub use stroke::{Point, Pointer, Stroke, StrokeId};
