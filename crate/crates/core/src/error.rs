use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        got: String,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |m - m^dagger| = {deviation:e} exceeds {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("entry count {got} does not match {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, got: usize },

    #[error("map is not linear: deviation {deviation:e} on a random combination")]
    NotLinear { deviation: f64 },

    #[error("channel is not unital: max |sum K K^dagger - 1| = {deviation:e}")]
    NotUnital { deviation: f64 },

    #[error("channel powers did not converge within {steps} steps (last difference {last_diff:e}); channel is not primitive")]
    NoConvergence { steps: usize, last_diff: f64 },

    #[error("{what} = {value} is outside the supported range {range}")]
    OutOfRange {
        what: &'static str,
        value: usize,
        range: &'static str,
    },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("joint_state evaluates causal models only; compose block_map_conventional for conventional ordering")]
    NonCausalOrdering,

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
}

impl Error {
    pub(crate) fn dims(op: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        Error::DimensionMismatch {
            op,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}
