use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate channel: all-zero matrix has no dominant direction")]
    DegenerateChannel,

    #[error("all gain samples are zero; the energy efficiency is identically zero")]
    NoPositiveGain,

    #[error("effective gain {value:e} is negative beyond rounding tolerance")]
    NegativeGain { value: f64 },

    #[error("root finder failed: {0}")]
    RootFinding(String),

    #[error("config error at line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("gain cache {path}: {reason}")]
    Cache { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical machinery rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateChannel
                | Error::NoPositiveGain
                | Error::NegativeGain { .. }
                | Error::RootFinding(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
