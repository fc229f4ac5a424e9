use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("SVD did not converge within {sweeps} Jacobi sweeps")]
    SvdNoConvergence { sweeps: usize },

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("{what} exceeds size guard ({size} > {limit})")]
    SizeGuard {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("binomial coefficients overflow exact f64 range for k = {k} (max 60)")]
    CoefficientOverflow { k: usize },

    #[error("basis diverged on interval [{lo}, {hi}]")]
    Diverged { lo: f64, hi: f64 },

    #[error("{solver} reached its iteration cap ({cap})")]
    IterationCap { solver: &'static str, cap: usize },

    #[error("line search found no acceptable step after {0} backtracks")]
    LineSearchFailed(usize),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}
