use thiserror::Error;

use crate::stationarity::ConvergenceReport;

/// Errors raised by the engines and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is missing, malformed or violates a model invariant.
    /// `key` names the offending configuration key (e.g. `model.alpha`).
    #[error("configuration error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    /// A state left its admissible region although the spec was validated.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("Poisson intensity {0} exceeds the arrival cap")]
    IntensityOverflow(f64),

    #[error("backward iterations did not converge within s_max = {}", .0.s_max)]
    NonConvergence(Box<ConvergenceReport>),

    /// The requested estimate presupposes a condition that the certificate does not grant.
    #[error("refused: {0}")]
    Refused(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
