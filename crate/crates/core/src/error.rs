use thiserror::Error;

/// Errors raised by the library. Computational failures and input errors are
/// kept apart so the CLI can map them onto different exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain argument: {0}")]
    DomainArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid potential: {0}")]
    Potential(String),

    #[error("polynomial parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    Asymmetric(f64),

    #[error("map is not admissible: {0}")]
    Admissibility(String),

    #[error("degree computation inconclusive: {0}")]
    Inconclusive(String),

    #[error("euler ring contexts differ: {0} vs {1}")]
    ContextMismatch(String, String),

    #[error("multiplication table incomplete: missing product {0}|{1}")]
    TableIncomplete(String, String),

    #[error("invalid multiplication table: {0}")]
    InvalidTable(String),

    #[error("class map error: {0}")]
    ClassMap(String),

    #[error("{0} is not a bifurcation level")]
    NotALevel(f64),

    #[error("inadmissible window: {0}")]
    InadmissibleWindow(String),

    #[error("newton iteration did not converge: {0}")]
    NotConverged(String),

    #[error("singular jacobian: {0}")]
    SingularJacobian(String),

    #[error("no branch captured at lambda = {0}")]
    NoBranch(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("json error: {0}")]
    Json(String),
}

impl Error {
    /// True for errors caused by bad input rather than a failed computation.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::DomainArgument(_)
                | Error::Unsupported(_)
                | Error::Potential(_)
                | Error::Parse { .. }
                | Error::Asymmetric(_)
                | Error::ContextMismatch(..)
                | Error::InvalidTable(_)
                | Error::ClassMap(_)
                | Error::InvalidArgument(_)
                | Error::Config(_)
                | Error::Io(_)
                | Error::Json(_)
        )
    }

    /// Short machine-readable kind used in JSON error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DomainArgument(_) => "domain-argument",
            Error::Unsupported(_) => "unsupported",
            Error::Potential(_) => "potential",
            Error::Parse { .. } => "parse",
            Error::Asymmetric(_) => "asymmetric",
            Error::Admissibility(_) => "admissibility",
            Error::Inconclusive(_) => "inconclusive",
            Error::ContextMismatch(..) => "context-mismatch",
            Error::TableIncomplete(..) => "table-incomplete",
            Error::InvalidTable(_) => "invalid-table",
            Error::ClassMap(_) => "class-map",
            Error::NotALevel(_) => "not-a-level",
            Error::InadmissibleWindow(_) => "inadmissible-window",
            Error::NotConverged(_) => "not-converged",
            Error::SingularJacobian(_) => "singular-jacobian",
            Error::NoBranch(_) => "no-branch",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
