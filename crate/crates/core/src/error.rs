use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("map is not completely positive (Choi matrix has eigenvalue {0:.3e})")]
    NotCompletelyPositive(f64),

    #[error("map is not unital (deviation {0:.3e})")]
    NotUnital(f64),

    #[error("map is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("matrix is not doubly stochastic: {0}")]
    NotDoublyStochastic(String),

    #[error("certificate residual {0:.3e} exceeds tolerance")]
    CertificateResidual(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed or inconsistent input rather than
    /// by a failed numerical or positivity check.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_)
                | Error::NotHermitian(_)
                | Error::InvalidTolerance(_)
                | Error::InvalidInput(_)
                | Error::NotUnital(_)
                | Error::NotTracePreserving(_)
                | Error::NotDoublyStochastic(_)
                | Error::Json(_)
        )
    }
}
