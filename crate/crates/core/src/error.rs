use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument lies outside its admissible domain.
    #[error("{what} must lie in {range}, got {value}")]
    Domain {
        what: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("usage error: {0}")]
    Usage(String),

    /// A quantity that is not defined for the given input (e.g. an empty group).
    #[error("undefined: {0}")]
    Undefined(&'static str),

    #[error("net benefit {nb} is infeasible for prevalence {prevalence} at threshold {t}")]
    Infeasible { nb: f64, prevalence: f64, t: f64 },

    /// Two algebraically equivalent routes disagreed. Always a bug.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("ingestion error at {}column `{column}`: {message}", row.map(|r| format!("row {r}, ")).unwrap_or_default())]
    Ingestion {
        row: Option<usize>,
        column: String,
        message: String,
    },

    #[error("report error: {0}")]
    Report(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(what: &'static str, range: &'static str, value: f64) -> Self {
        Error::Domain { what, range, value }
    }

    /// Process exit status for this error: 1 usage, 2 data/validation, 3 invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::InvariantViolation(_) => 3,
            Error::Domain { .. }
            | Error::Undefined(_)
            | Error::Infeasible { .. }
            | Error::Ingestion { .. }
            | Error::Report(_)
            | Error::Io(_) => 2,
        }
    }
}
