use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gamma = -1 has a logarithmic primitive and is not supported")]
    LogarithmicPrimitive,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge (last estimate {last}, previous {previous})")]
    Quadrature { last: f64, previous: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("eigenvalue-degenerate problem: {0}")]
    EigenvalueDegenerate(String),

    #[error("degenerate family of solutions: {0}")]
    DegenerateFamily(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no sign change of the shooting residual on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code used in JSON reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::LogarithmicPrimitive => "logarithmic_primitive",
            Error::Domain(_) => "domain",
            Error::Quadrature { .. } => "quadrature_failure",
            Error::NoSolution(_) => "no_solution",
            Error::EigenvalueDegenerate(_) => "eigenvalue_degenerate",
            Error::DegenerateFamily(_) => "degenerate_family",
            Error::Unsupported(_) => "unsupported",
            Error::NoBracket { .. } => "no_bracket",
            Error::Internal(_) => "internal",
            Error::Contract(_) => "contract",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
