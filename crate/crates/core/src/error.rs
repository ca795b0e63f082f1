use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("GOP index must be >= 1, got {0}")]
    GopIndex(usize),

    #[error("{what}: no sample inside [{lo}, {hi}] after {redraws} redraws")]
    Sampling {
        what: &'static str,
        lo: f64,
        hi: f64,
        redraws: usize,
    },

    #[error(
        "calibration failed for shape {shape}: target FAV {target:.4}, closest achievable {achieved:.4}"
    )]
    Calibration {
        shape: f64,
        target: f64,
        achieved: f64,
    },

    #[error("malformed record at {path}:{line}: {reason}")]
    Format {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
