use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameters, vocabularies or models that do not fit together.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed or inconsistent input data (files, corpora, traces).
    #[error("data error: {0}")]
    Data(String),

    /// No token passed the entropy gate, so the z statistic does not exist.
    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),

    /// A metric needs both classes (or some other minimum) and did not get it.
    #[error("metric undefined: {0}")]
    MetricUndefined(String),

    /// The bound-comparison assumption cannot be evaluated (alpha * mean gated spike <= 1).
    #[error("assumption inapplicable: {0}")]
    Inapplicable(String),

    #[error("lex error at byte {offset}: {message}")]
    Lex { offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    /// True for errors caused by bad configuration rather than bad data.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}
