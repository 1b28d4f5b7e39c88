use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// `sqrt(wᵀΣw)` fell below the degeneracy threshold.
    #[error("degenerate projection: sigma = {sigma:e} below threshold")]
    DegenerateProjection { sigma: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("singular model: {0}")]
    SingularModel(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("no initializer: {0}")]
    NoInitializer(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
