use thiserror::Error;

/// Every failure the library reports. Variants map one-to-one onto the
/// error kinds named by the operation contracts.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("composition undefined: inner series has nonzero constant term {0}")]
    CompositionUndefined(f64),
    #[error("series not invertible: linear coefficient vanishes")]
    NotInvertible,
    #[error("square-root branch undefined: leading coefficient {0} is not positive")]
    BranchUndefined(f64),
    #[error("point {0} is outside the evaluation domain")]
    OutOfDomain(String),
    #[error("S-transform undefined: {0}")]
    SUndefined(String),
    #[error("degenerate measure: atom at the origin carries mass {0} >= 1")]
    DegenerateMeasure(f64),
    #[error("fixed-point solver failed at z = {z}: {reason}")]
    SolverFailed { z: String, reason: String },
    #[error("iterate left the evaluator's domain at z = {0}")]
    DomainEscape(String),
    #[error("Stieltjes inversion failed: recovered mass {0}")]
    InversionFailed(f64),
    #[error("evolution failed: {failed} of {total} grid points did not converge")]
    EvolutionFailed { failed: usize, total: usize },
    #[error("SDE step failed after {0} consecutive rejections")]
    StepFailed(usize),
    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
