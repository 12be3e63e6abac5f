use thiserror::Error;

use crate::equilibria::Classification;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("parameter {name} = {value} is outside the model domain")]
    ParamDomain { name: String, value: f64 },

    #[error("no seed converged to an equilibrium")]
    NoEquilibriumFound,

    #[error("continuation lost: {0}")]
    ContinuationLost(String),

    #[error("classification changed from {from} to {to}")]
    ClassificationChanged {
        from: Classification,
        to: Classification,
    },

    #[error("ambiguous eigenpair match (best overlap {best:.4}, second {second:.4})")]
    AmbiguousMatch { best: f64, second: f64 },

    #[error("Jacobian is numerically singular (condition estimate {0:.3e})")]
    SingularJacobian(f64),

    #[error("eigenvalue {index} is not simple")]
    DegenerateEigenvalue { index: usize },

    #[error("left and right eigenvectors of eigenvalue {index} are nearly orthogonal")]
    NearOrthogonalPair { index: usize },

    #[error("cone projection removed every coordinate")]
    EmptyProjection,

    #[error("trajectory blew up at t = {t}")]
    BlowUp { t: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
