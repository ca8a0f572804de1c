use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("range error in {op}: {detail}")]
    Range { op: &'static str, detail: String },

    #[error("insufficient resolution in {op}: {detail}")]
    Resolution { op: &'static str, detail: String },

    #[error("structural mismatch: {0}")]
    Structure(String),

    #[error("evaluation error on {branch} at tau = {tau}: {detail}")]
    Evaluation {
        branch: String,
        tau: f64,
        detail: String,
    },

    #[error("theta too small: denominator for {interval} is {value} (must be positive)")]
    ThetaTooSmall { interval: String, value: f64 },

    #[error("no theta threshold below {upper}: contraction constant is {value} there")]
    NoThreshold { upper: f64, value: f64 },

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("comparison function condition fails: {0}")]
    ComparisonCondition(String),

    #[error("unknown {kind} '{name}' (known: {known})")]
    Unknown {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error(transparent)]
    Expr(#[from] crate::expr::ExprError),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
