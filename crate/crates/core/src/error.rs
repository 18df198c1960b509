use thiserror::Error;

use crate::chsh::Context;

pub type Result<T, E = TaraError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum TaraError {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("missing contexts: {0}")]
    MissingContexts(String),

    #[error("non-physical correlator input: |S| = {0}")]
    NonPhysical(f64),

    #[error("uncalibrated context {0}")]
    UncalibratedContext(Context),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("singular scatter: {0}")]
    SingularScatter(String),

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("zero pooled variance")]
    ZeroVariance,

    #[error("single-class input: both classical and quantum labels are required")]
    SingleClass,

    #[error("{message}, line {line}")]
    Parse { line: usize, message: String },

    #[error("model file: {0}")]
    Schema(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl TaraError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        TaraError::InvalidArgument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        TaraError::Config(msg.into())
    }

    /// True for errors caused by bad user input (flags, config files, data files)
    /// rather than by a failure while computing.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            TaraError::Config(_)
                | TaraError::InvalidArgument(_)
                | TaraError::Parse { .. }
                | TaraError::Schema(_)
        )
    }
}
