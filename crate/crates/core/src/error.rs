use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} must be {expected}, got {value}")]
    OutOfDomain {
        name: &'static str,
        expected: &'static str,
        value: f64,
    },

    #[error("Fock dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("truncation tail mass {0:e} exceeds the allowed {1:e}; raise the Fock cutoff")]
    ExcessTailMass(f64, f64),

    #[error("eigendecomposition failed: {0}")]
    Eigen(&'static str),

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("minimizer failed to bracket a minimum on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("expected {expected} counts, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("count {0} has zero likelihood under both hypotheses")]
    MalformedLikelihood(u32),

    #[error("{0} dataset is empty")]
    EmptyDataset(&'static str),

    #[error("need at least 2 points with nonzero error to fit, got {0}")]
    TooFewPoints(usize),

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
}

impl Error {
    pub(crate) fn domain(name: &'static str, expected: &'static str, value: f64) -> Self {
        Error::OutOfDomain {
            name,
            expected,
            value,
        }
    }

    /// True for errors caused by bad user-supplied parameters rather than
    /// numerical breakdown.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::OutOfDomain { .. }
                | Error::DimensionTooSmall(_)
                | Error::DimensionMismatch(..)
                | Error::LengthMismatch { .. }
                | Error::EmptyDataset(_)
                | Error::InvalidConfig(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
