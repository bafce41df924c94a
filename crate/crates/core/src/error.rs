use thiserror::Error;

/// Every failure the library can report. The `Display` form is
/// `<kind>: <detail>`, which the CLI prefixes with `error: `.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("capacity: {0}")]
    Capacity(String),
    #[error("shape: {0}")]
    Shape(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("applicability: {0}")]
    Applicability(String),
    #[error("parse: {0}")]
    Parse(String),
    #[error("validation: {0}")]
    Validation(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("unbounded-rate: {0}")]
    UnboundedRate(String),
    #[error("search-exhausted: {0}")]
    SearchExhausted(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable kind, e.g. `validation`.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Capacity(_) => "capacity",
            Error::Shape(_) => "shape",
            Error::Domain(_) => "domain",
            Error::Applicability(_) => "applicability",
            Error::Parse(_) => "parse",
            Error::Validation(_) => "validation",
            Error::Infeasible(_) => "infeasible",
            Error::UnboundedRate(_) => "unbounded-rate",
            Error::SearchExhausted(_) => "search-exhausted",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
