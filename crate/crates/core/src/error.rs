use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    /// A caller broke a documented precondition (shape, range, length).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("kernel matrix for {n} points needs {needed} bytes, budget is {budget}; truncate the kernel or subsample")]
    Capacity { n: usize, needed: usize, budget: usize },

    #[error("point {index} is disconnected or isolated (degree {degree:e}); increase epsilon")]
    Disconnected { index: usize, degree: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (max residual {residual:e})")]
    EigenNoConvergence { iterations: usize, residual: f64 },

    #[error("step-size blowup at step {step}: |grad U| * dt = {drift:e} exceeds 10x coordinate scale; use a smaller dt")]
    StepSizeBlowup { step: usize, drift: f64 },

    #[error("degenerate point cloud: {0}")]
    DegenerateCloud(String),

    #[error("insufficient data: need at least {needed} points, have {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("unsupported input: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Disconnected { .. }
                | Error::EigenNoConvergence { .. }
                | Error::StepSizeBlowup { .. }
                | Error::DegenerateCloud(_)
        )
    }
}
