use thiserror::Error;

/// Errors raised by the numerical and combinatorial routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("offset mismatch: {left} vs {right}")]
    OffsetMismatch { left: i64, right: i64 },

    #[error("not positive definite: non-positive pivot at row {row}")]
    NotPositiveDefinite { row: usize },

    #[error("singular system: zero pivot at row {row}")]
    Singular { row: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no real solution: {0}")]
    NoRealSolution(String),

    #[error("branch invalid at block s={s}{}: {reason}", match .critical { Some(c) => format!(", critical point #{c}"), None => String::new() })]
    BranchInvalid {
        s: i64,
        critical: Option<usize>,
        reason: String,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no convergence: {0}")]
    NonConvergent(String),

    #[error("non-real inverse branch encountered at x = {x}")]
    NonRealBranch { x: f64 },

    #[error("flow left the open unit disk at step {step} (|a_{index}| = {modulus})")]
    FlowLeftDomain {
        step: usize,
        index: usize,
        modulus: f64,
    },

    #[error("malformed permutation: {0}")]
    MalformedPermutation(String),

    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;
