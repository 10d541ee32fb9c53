use thiserror::Error;

/// Errors raised by the samplers, the walk engine and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error(
        "truncated series exhausted: total mass {mass} does not exceed level {level}; increase the truncation depth K"
    )]
    TruncationExhausted { level: f64, mass: f64 },

    #[error("walk saturated: all {steps} steps occur before time {level}; sample a longer walk")]
    WalkSaturated { level: f64, steps: usize },

    #[error(
        "truncated series cannot certify the top {k_max} marks at depth {depth}; increase the truncation depth K"
    )]
    Uncertified { k_max: usize, depth: usize },

    #[error(
        "truncated series may miss marks above {eps} (largest omitted mark is below {bound}); increase the truncation depth K"
    )]
    IncompleteSeries { eps: f64, bound: f64 },

    #[error("replicate {replicate}: {source}")]
    Replicate {
        replicate: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::InvalidModel(msg.into())
    }

    /// The innermost error, looking through replicate wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Replicate { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
