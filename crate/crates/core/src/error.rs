use thiserror::Error;

/// Errors raised by the enumeration, window and statistics routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{n} is a quadratic non-residue modulo {p}")]
    NonResidue { n: i64, p: u64 },

    #[error("bad input: {0}")]
    BadInput(String),

    #[error("plateau transition width {0} is outside (0, 1/2)")]
    BadEps(f64),

    #[error("quadrature did not reach tolerance {tol:e} within {max_intervals} intervals")]
    QuadratureFailure { tol: f64, max_intervals: usize },

    #[error("tail certificate not met below k_max = {limit}")]
    TruncationFailure { limit: u64 },

    #[error("grid of {grid} points is below the anti-aliasing threshold {required}")]
    AliasingRisk { grid: usize, required: usize },

    #[error("sector width must be in (0, pi/2], got {0}")]
    BadSector(f64),

    #[error("no ideals in the norm range ({0}, {1}]")]
    EmptyRange(u64, u64),

    #[error("{0} does not split in Z[sqrt 2]")]
    NotSplit(u64),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Numerical failures (as opposed to rejected inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::QuadratureFailure { .. } | Error::TruncationFailure { .. } | Error::AliasingRisk { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
