use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("factorization failed in {0}: matrix is not positive definite")]
    NotPositiveDefinite(&'static str),
    #[error("zero average norm for UE {ue} (AP {ap:?})")]
    ZeroNorm { ue: usize, ap: Option<usize> },
    #[error("combiner has no deterministic scalar profile")]
    MissingProfile,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
