use thiserror::Error;

/// Errors produced by graph construction, parsing and the numerical schemes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("graph must have at least one vertex")]
    EmptyGraph,

    #[error("invalid weight {weight} on edge ({i}, {j})")]
    InvalidWeight { i: usize, j: usize, weight: f64 },

    #[error("weight matrix is not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({i}, {j})")]
    DuplicateEdge { i: usize, j: usize },

    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("vertex {0} has zero degree")]
    ZeroDegree(usize),

    #[error("graph is not connected")]
    Disconnected,

    #[error("degree exponent r = {0} outside [0, 1]")]
    InvalidExponent(f64),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("symmetric eigensolver did not converge")]
    Eigensolver,

    #[error("step rejected at t = {t}: value {value} left the admissible band")]
    StepRejected { t: f64, value: f64 },

    #[error("exhaustive search over {n} vertices exceeds the limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Eigensolver | Error::StepRejected { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}
