use thiserror::Error;

/// Failures raised by the linear algebra kernels, the chart machinery and
/// the integrators.
///
/// Column indices are zero-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("column {column} is numerically zero")]
    ZeroColumn { column: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is numerically rank deficient at column {column}")]
    RankDeficient { column: usize },

    #[error("vector to reflect in column {column} is numerically zero")]
    DegenerateReflector { column: usize },

    #[error("reimbedding probe for column {column} has norm {norm}, orthogonality lost")]
    DegenerateProbe { column: usize, norm: f64 },

    #[error("division hazard in column {column}: divisor {value:e} too small")]
    DivisionHazard { column: usize, value: f64 },

    #[error("non-finite state in column {column}")]
    NonFinite { column: usize },

    #[error("step size underflow at t = {t}: h = {h:e} (last rejection in column {column})")]
    StepsizeUnderflow { t: f64, h: f64, column: usize },

    #[error("at t = {t}: {source}")]
    AtTime { t: f64, source: Box<Error> },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn at(self, t: f64) -> Error {
        match self {
            e @ (Error::StepsizeUnderflow { .. } | Error::AtTime { .. }) => e,
            e => Error::AtTime {
                t,
                source: Box::new(e),
            },
        }
    }

    /// Reattributes a column-local failure to column `column`.
    pub(crate) fn in_column(self, column: usize) -> Error {
        match self {
            Error::DivisionHazard { value, .. } => Error::DivisionHazard { column, value },
            Error::NonFinite { .. } => Error::NonFinite { column },
            Error::DegenerateReflector { .. } => Error::DegenerateReflector { column },
            Error::ZeroColumn { .. } => Error::ZeroColumn { column },
            e => e,
        }
    }

    /// The innermost error, with any time context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTime { source, .. } => source.root(),
            e => e,
        }
    }

    /// Column the failure is attributed to, if any.
    pub fn column(&self) -> Option<usize> {
        match self.root() {
            Error::ZeroColumn { column }
            | Error::RankDeficient { column }
            | Error::DegenerateReflector { column }
            | Error::DegenerateProbe { column, .. }
            | Error::DivisionHazard { column, .. }
            | Error::NonFinite { column }
            | Error::StepsizeUnderflow { column, .. } => Some(*column),
            _ => None,
        }
    }

    /// Time at which the failure happened, if known.
    pub fn time(&self) -> Option<f64> {
        match self {
            Error::AtTime { t, .. } | Error::StepsizeUnderflow { t, .. } => Some(*t),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
