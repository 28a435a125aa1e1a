use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coordinate ({x}, {y}) outside {width}x{height} image")]
    OutOfRange {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    Shape(usize, usize, usize, usize),

    #[error("no vessel {}", near.map(|(x, y)| format!("near point ({x}, {y})")).unwrap_or_else(|| "centerline available".into()))]
    NoVessel { near: Option<(f64, f64)> },

    #[error("profile stack has too little contrast to cluster")]
    LowContrast,

    #[error("path with {0} points is too short for tangent estimation")]
    DegeneratePath(usize),

    #[error("vessel tracking lost at frame {frame}")]
    TrackingLost { frame: usize },

    #[error("series of length {len} is too short (need at least {min})")]
    TooShort { len: usize, min: usize },

    #[error("fewer than two extrema found; no measurable pulsation")]
    InsufficientPulsation,

    #[error("{0} is undefined (zero denominator)")]
    UndefinedMetric(&'static str),

    #[error("width comparison needs at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{field}: {message}")]
    Validation { field: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Decode { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}
