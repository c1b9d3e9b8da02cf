use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("features not full rank (inverse condition number {kappa:e})")]
    RankDeficientFeatures { kappa: f64 },

    /// The unary energy term needs the all-ones item vector inside the row
    /// space of the features to be expressible as `A^T L A`.
    #[error("all-ones vector is outside the feature row space (relative residual {residual:e})")]
    OnesOutsideRowSpace { residual: f64 },

    #[error("malformed order: {0}")]
    MalformedOrder(String),

    #[error("solver diverged after {iterations} iterations with a fixed step; use backtracking")]
    Diverged { iterations: usize },

    #[error("non-finite objective at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures raised by the numerical solver rather than by the data.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::Diverged { .. } | Error::NonFiniteObjective { .. })
    }
}
