use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("score {0} is outside [0, 1]")]
    ScoreOutOfRange(f64),

    #[error("{value} is outside the domain of the dyadic bucket map ({domain})")]
    NoBucket { value: f64, domain: &'static str },

    #[error("invalid score distribution: {0}")]
    InvalidDistribution(String),

    #[error("max score of an empty list is undefined")]
    EmptyList,

    #[error("the sketch has aborted")]
    Aborted,

    #[error("operation not supported by this sketch configuration: {0}")]
    Unsupported(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pick index {index} is outside 1..={cardinality}")]
    PickOutOfRange { index: u64, cardinality: u64 },

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("invalid stream spec: {0}")]
    InvalidStream(String),

    #[error("transcript does not carry per-step scores")]
    MissingScores,
}
