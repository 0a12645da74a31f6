use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported kind: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("gram matrix is not positive definite (smallest pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("polynomial has degree 0 after deflation")]
    DegreeZero,

    #[error("root iteration did not converge after {iterations} sweeps; unconverged roots {unconverged:?}")]
    NoConvergence {
        iterations: usize,
        unconverged: Vec<usize>,
    },

    #[error("degenerate system: {0}")]
    Degenerate(String),

    #[error("test function undefined at {0}")]
    UndefinedTestFunction(String),

    #[error("section violates the K-normalization (sup weighted norm {0:e} > 1)")]
    NotNormalized(f64),

    #[error("too many degenerate trials: {resampled} of {trials}")]
    ExcessiveResampling { resampled: usize, trials: usize },

    #[error("config error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("{context}: {source}")]
    Trial {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for configuration/schema problems (as opposed to numerical failures).
    pub fn is_schema(&self) -> bool {
        match self {
            Error::Schema { .. } => true,
            Error::Trial { source, .. } => source.is_schema(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
