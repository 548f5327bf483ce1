use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("scale too small: {0}")]
    ScaleTooSmall(String),
    #[error("lattice point outside the sampled grid: {0}")]
    OutOfGrid(String),
    #[error("parity violation: x + t = {0} must be odd")]
    Parity(i64),
    #[error("pole: {0}")]
    Pole(String),
    #[error("invalid contour: {0}")]
    Contour(String),
    #[error("block index mismatch: {0}")]
    Indexing(String),
    #[error("accuracy target not met in {what} (achieved {achieved:e})")]
    Accuracy { what: String, achieved: f64 },
    #[error("overflow in {what} (log-magnitude {log_magnitude:.3})")]
    Overflow { what: String, log_magnitude: f64 },
    #[error("support scan exceeded its hard cap: {0}")]
    Support(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn accuracy(what: impl Into<String>, achieved: f64) -> Self {
        Error::Accuracy { what: what.into(), achieved }
    }

    /// Process exit code: 2 for bad parameters, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::ScaleTooSmall(_)
            | Error::OutOfGrid(_)
            | Error::Parity(_)
            | Error::Pole(_)
            | Error::Contour(_)
            | Error::Indexing(_) => 2,
            Error::Accuracy { .. } | Error::Overflow { .. } | Error::Support(_) => 3,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
        }
    }
}
