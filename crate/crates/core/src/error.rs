//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported group descriptor `{0}` (expected cyclic:<n>, dihedral:<n>, symmetric:<n>, reflect-x or z-swap)")]
    UnsupportedGroup(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("group has no output representation")]
    MissingOutputRep,

    #[error("weights not normalized (sum = {0})")]
    WeightsNotNormalized(f64),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("variance underflow: component {value:e} is at or below the floor {floor:e}")]
    VarianceUnderflow { value: f64, floor: f64 },

    #[error("degenerate truncation: normalizing mass {0:e} is below 1e-300")]
    DegenerateTruncation(f64),

    #[error("degenerate orbit weighting: {0}")]
    DegenerateOrbitWeighting(String),

    #[error("quadrature did not converge to {tol:e} on [{a}, {b}]")]
    QuadratureNonConvergence { a: f64, b: f64, tol: f64 },

    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Divergence { epoch: usize, loss: f64 },

    #[error("empty selection: {0}")]
    Empty(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Divergence { .. }
                | Error::QuadratureNonConvergence { .. }
                | Error::DegenerateTruncation(_)
                | Error::DegenerateOrbitWeighting(_)
                | Error::VarianceUnderflow { .. }
        )
    }
}
