use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("column {j} has zero norm")]
    ZeroColumn { j: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("super-optimal undefined: eigenvalue {index} of c_F(A^H) has magnitude {magnitude:.3e}")]
    SuperOptimalUndefined { index: usize, magnitude: f64 },

    #[error("operator is not unitary: deviation {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("simulation cap exceeded: {required} > {cap}")]
    CapExceeded { required: usize, cap: usize },

    #[error("numerically singular: {0}")]
    NumericallySingular(String),

    #[error("invalid rotation: Z = {z:.6e} exceeds min kept sigma {min_sigma:.6e}")]
    InvalidRotation { z: f64, min_sigma: f64 },

    #[error("empty post-selection: {0}")]
    EmptyPostSelection(String),

    #[error("register {0} is entangled; cannot discard")]
    EntangledRegister(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("fidelity {fidelity} below asserted threshold {threshold}")]
    FidelityAssertion { fidelity: f64, threshold: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("linear algebra backend error: {0}")]
    Backend(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Backend(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
