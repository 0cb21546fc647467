use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An element lies outside its group's chart domain or index range.
    #[error("domain violation in {group}: {detail}")]
    DomainViolation { group: String, detail: String },

    /// The integration scheme does not fit the group (e.g. exact sum on a charted group).
    #[error("configuration error: {0}")]
    Config(String),

    /// The integrand is nonzero on the boundary of its quadrature window.
    #[error("integration domain error: {0}")]
    IntegrationDomain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The operation is only defined for some group kinds.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A section lift was requested where the dominating function averages to zero.
    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("division by zero density: {0}")]
    DivisionDomain(String),

    /// A covering set failed its sampled coverage verification.
    #[error("cover incomplete: witness {witness}")]
    CoverIncomplete { witness: String },

    #[error("positivity failure: {0}")]
    Positivity(String),

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
