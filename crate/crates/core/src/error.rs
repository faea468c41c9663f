use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variants are grouped so the CLI can map them onto exit codes: input and
/// parsing problems are configuration errors, everything else is a numeric
/// domain violation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("evolution quaternion is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("Bloch vector norm {norm} outside the admissible domain (limit {limit})")]
    OutOfDomain { norm: f64, limit: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("singular metric (condition number {0:.3e})")]
    SingularMetric(f64),

    #[error("system too large: dimension {0} exceeds 4096")]
    Oversize(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by malformed input rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::InvalidArgument(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
