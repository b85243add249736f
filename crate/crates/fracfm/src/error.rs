use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("kernel evaluated at separation {0:e}, below the minimum 1e-10")]
    Singular(f64),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("ill-conditioned system (reciprocal condition estimate {rcond:e}): {hint}")]
    IllConditioned { rcond: f64, hint: String },
    #[error("eigensolver failure: {0}")]
    Eigen(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("archive: {0}")]
    Archive(String),
    #[error("config: {0}")]
    Config(String),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}
