use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric (max deviation {max_deviation:.3e})")]
    NotSymmetric { max_deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("degenerate event {index}: zero probability")]
    DegenerateEvent { index: usize },

    #[error("row {row} is not stochastic (sum {sum})")]
    NotStochastic { row: usize, sum: f64 },

    #[error("log of zero reached a loss ({0})")]
    LogOfZero(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("eigen-solver did not converge after {sweeps} sweeps (off-diagonal {off:.3e})")]
    NotConverged { sweeps: usize, off: f64 },

    #[error("optimizer diverged at iteration {iteration} (loss {loss})")]
    Diverged { iteration: usize, loss: f64 },

    #[error(
        "neighbourhood graph has {components} connected components; \
         enlarge the radius/neighbour count (at the risk of short-circuiting the manifold)"
    )]
    DisconnectedGraph { components: usize },

    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}
