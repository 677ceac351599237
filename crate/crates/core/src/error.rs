use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulation library.
///
/// Structured construction failures carry the step that got stuck so that
/// per-trial diagnostics stay machine readable.
#[derive(Debug, Error)]
pub enum GeoError {
    /// Caller violated an API precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// Input outside the mathematical domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// The asymptotic structure the construction relies on is absent.
    #[error("regime diagnostic {code}: {detail}")]
    Regime { code: &'static str, detail: String },

    /// A constructive procedure could not complete.
    #[error("construction failed at {step} (component {component:?}): {detail}")]
    Construction {
        step: &'static str,
        component: Option<usize>,
        detail: String,
    },

    /// A process ran past its safety cap or a queue ran dry.
    #[error("length error: {0}")]
    Length(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl GeoError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GeoError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn regime(code: &'static str, detail: impl Into<String>) -> Self {
        GeoError::Regime {
            code,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, GeoError>;
