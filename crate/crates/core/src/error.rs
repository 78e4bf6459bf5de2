use thiserror::Error;

use crate::quantities::Dimension;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: Dimension, found: Dimension },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("unknown unit `{0}`")]
    UnknownUnit(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A formula is used outside the regime where it holds.
    #[error("validity error: {0}")]
    Validity(String),

    #[error("stability error: {0}")]
    Stability(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("grid coverage error: {0}")]
    Coverage(String),

    #[error("no stationary state: spontaneous diffusion {d_sp:e} with zero thermal diffusion")]
    UndampedHeating { d_sp: f64 },

    #[error("no bound: {0}")]
    NoBound(String),

    #[error("missing input: {0}")]
    Missing(String),

    #[error("parse error at line {line}, column `{column}`: {message}")]
    Parse {
        line: usize,
        column: String,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the filesystem rather than the inputs.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => e.is_io_error(),
            Error::Json(e) => e.is_io(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
