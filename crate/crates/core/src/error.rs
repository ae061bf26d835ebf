use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name}: {value} ({reason})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("unknown preset `{0}` (expected `silicon` or `skin`)")]
    UnknownPreset(String),

    #[error("invalid valve calibration: {0}")]
    InvalidCalibration(String),

    #[error("target velocity {target} m/s exceeds calibrated maximum {max} m/s")]
    VelocityOutOfRange { target: f64, max: f64 },

    #[error("supply pressure {pressure} Pa outside operating band [{low}, {high}] Pa")]
    PressureOutOfBand { pressure: f64, low: f64, high: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("fit did not converge: {0}")]
    NonConvergence(String),

    #[error("calibration target unreachable: {0}")]
    Unreachable(String),

    #[error("{path}: line {line}: {message}")]
    MalformedRow {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the data itself rather than configuration.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::DegenerateData(_) | Error::NonConvergence(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn ensure_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}
