use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Fock space with total dimension {total_dim} exceeds the capacity budget of {budget} amplitudes")]
    Capacity { total_dim: u128, budget: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("incompatible spaces: {0}")]
    IncompatibleSpaces(String),

    #[error("degree {degree} exceeds the truncation {max_degree}")]
    Degree { degree: usize, max_degree: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inconsistent tail: psi({index}) = {value:e} does not vanish at the end of the range")]
    InconsistentTail { index: usize, value: f64 },

    #[error("contraction is not I-compatible: defect {defect:e} exceeds {tolerance:e}")]
    Compatibility { defect: f64, tolerance: f64 },

    #[error("power iteration did not converge after {iterations} iterations (drift {drift:e})")]
    NonConvergence { iterations: usize, drift: f64 },

    #[error("search cap exceeded: {0}")]
    SearchCap(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
