use thiserror::Error;

/// Everything that can go wrong in the library. Variants map onto the
/// failure classes of the public operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("invalid regime: {0}")]
    InvalidRegime(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// The simulated intensity left the sampled part of the Poisson field.
    /// Callers retry with a larger ceiling.
    #[error("theta ceiling {ceiling} exceeded (intensity reached {reached})")]
    CeilingExceeded { ceiling: f64, reached: f64 },
    #[error("missing data for cell ({i}, {j})")]
    MissingCell { i: usize, j: usize },
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn ensure(cond: bool, err: impl FnOnce() -> Error) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(err())
    }
}
