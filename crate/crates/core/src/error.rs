use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot parse law spec `{spec}`: {reason}")]
    Parse { spec: String, reason: String },

    #[error("invalid law: {0}")]
    Validation(String),

    #[error("operation `{op}` does not apply to {what}")]
    WrongKind { op: &'static str, what: String },

    #[error("span mismatch: {0} vs {1}")]
    SpanMismatch(i64, i64),

    #[error("renewal sequence too short: need index {needed}, have {available}")]
    RenewalTooShort { needed: i64, available: usize },

    #[error("law is not symmetric: mu({k}) != mu(-{k})")]
    Asymmetric { k: i64 },

    #[error("Wiener-Hopf input: {0}")]
    LadderLaw(String),

    #[error("walk drifts to -infinity: {0}")]
    Drift(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid argument: {0}")]
    Argument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
