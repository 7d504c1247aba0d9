use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("height field overflows the grid along the {axis} axis ({detail})")]
    ExtentOverflow { axis: char, detail: String },

    #[error("resolution mismatch: {left} vs {right}")]
    ResolutionMismatch { left: String, right: String },

    #[error("camera inconsistent with grid: {0}")]
    CameraMismatch(String),

    #[error("malformed depth image: {0}")]
    MalformedDepth(String),

    #[error("position {x} m lies outside the span [0, {span}] m")]
    OutsideSpan { x: f64, span: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("material {0} is not a foam")]
    NotFoam(String),

    #[error("condition {field} index {value} out of range (width {width})")]
    ConditionRange {
        field: &'static str,
        value: usize,
        width: usize,
    },

    #[error("malformed {segment} segment in condition vector")]
    MalformedSegment { segment: &'static str },

    #[error("shape mismatch at {layer}: expected {expected:?}, got {got:?}")]
    Shape {
        layer: String,
        expected: Vec<usize>,
        got: Vec<usize>,
    },

    #[error("checkpoint spec hash mismatch: file {file:016x}, expected {expected:016x}")]
    SpecHashMismatch { file: u64, expected: u64 },

    #[error("corrupt {kind} file: {detail}")]
    Corrupt { kind: &'static str, detail: String },

    #[error("non-finite {what} at step {step}")]
    NonFinite { what: String, step: u64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("image: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn corrupt(kind: &'static str, detail: impl Into<String>) -> Self {
        Error::Corrupt {
            kind,
            detail: detail.into(),
        }
    }
}
