use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot normalize a vector of norm {norm:e}")]
    ZeroVector { norm: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension p = {0}; the sphere needs p >= 2")]
    InvalidDimension(usize),

    #[error("sphere grids are only available for p = 2 or 3, got p = {0}")]
    UnsupportedDimension(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature failed to converge after {subdivisions} subdivisions (error estimate {error:e})")]
    NoConvergence { subdivisions: usize, error: f64 },

    #[error("target E[X'theta] = {target} is unreachable (supremum on the search bracket is {supremum})")]
    TargetUnreachable { target: f64, supremum: f64 },

    #[error("invalid radial function `{name}`: {reason}")]
    InvalidRadial { name: String, reason: String },

    #[error("degenerate spherical mean: ||mean|| = {norm:e}")]
    DegenerateMean { norm: f64 },

    #[error("degenerate denominator 1 - mean((X'theta0)^2) = {value:e}: all mass sits at +/- theta0")]
    DegenerateDenominator { value: f64 },

    #[error("no LAN expansion is implemented for the {0} regime")]
    UnsupportedRegime(String),

    #[error("parse error at line {line}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        line: usize,
        column: Option<usize>,
        message: String,
    },

    #[error("row at line {line} has norm {norm}, which is not within 1e-6 of 1")]
    Normalization { line: usize, norm: f64 },

    #[error("config error for key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end: 2 for usage,
    /// configuration and input problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence { .. }
            | Error::DegenerateMean { .. }
            | Error::DegenerateDenominator { .. } => 3,
            _ => 2,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
