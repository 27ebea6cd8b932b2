use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resonance: mode ({m},{n}) denominator |{magnitude:e}| at omega = {omega} rad/s")]
    Resonance {
        m: u32,
        n: u32,
        omega: f64,
        magnitude: f64,
    },

    #[error("position ({x}, {y}) m lies outside the {a} x {b} m plate")]
    OutOfBounds { x: f64, y: f64, a: f64, b: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("window length {actual} samples, expected {expected} (exactly 1.0 s)")]
    WindowLength { expected: usize, actual: usize },

    #[error("need at least {required} {what}, got {actual}")]
    InsufficientData {
        what: &'static str,
        required: usize,
        actual: usize,
    },

    #[error("ill-posed least squares: {0}")]
    IllPosed(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("location mismatch: {before} vs {after}")]
    LocationMismatch { before: u32, after: u32 },

    #[error("no model for location {0}")]
    MissingModel(u32),

    #[error("bad magic {0:?}, expected \"WVB1\"")]
    BadMagic([u8; 4]),

    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("header/manifest mismatch: {0}")]
    HeaderMismatch(String),

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
