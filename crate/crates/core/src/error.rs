use std::path::PathBuf;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Non-finite or out-of-range numerical input.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed height-map, trajectory or log file.
    #[error("format error: {0}")]
    Format(String),
    /// Inconsistent array dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// Invalid or inconsistent configuration.
    #[error("config error: {0}")]
    Config(String),
    /// The trajectory planner failed for a given segment.
    #[error("planner did not converge on segment {segment}: {reason}")]
    PlannerNonConvergence { segment: usize, reason: String },
    /// The closed-loop run produced a non-finite state.
    #[error("simulation diverged at t = {time:.3} s")]
    Divergence { time: f64 },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
