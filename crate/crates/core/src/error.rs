use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid algebra shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("operator is not self-adjoint (residual {residual:.3e} > tol {tol:.3e})")]
    NotSelfAdjoint { residual: f64, tol: f64 },

    #[error("operator is not a projection (residual {residual:.3e})")]
    NotProjection { residual: f64 },

    #[error("invalid spectral window ({lo}, {hi}]")]
    InvalidWindow { lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid Orlicz function: {0}")]
    InvalidOrlicz(String),

    #[error("invalid concave function: {0}")]
    InvalidPhi(String),

    #[error("generators {i} and {j} do not commute (residual {residual:.3e})")]
    NonCommuting { i: usize, j: usize, residual: f64 },

    #[error("DS+ spot check failed at u = {u:?}: {reason}")]
    SpotcheckFailed { u: Vec<f64>, reason: String },

    #[error("invalid family spec: {0}")]
    InvalidFamily(String),

    #[error("brute force limited to diagonal algebras with at most {max} atoms (got {got})")]
    BruteForceTooLarge { max: usize, got: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Scenario(e.to_string())
    }
}
