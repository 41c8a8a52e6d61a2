use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("bad subsystem: {0}")]
    BadSubsystem(String),
    #[error("invalid dimensions: {0}")]
    Dimension(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("bad channel parameters: {0}")]
    BadParams(String),
    #[error("correlated noise is not supported for {0}")]
    UnsupportedCorrelation(String),
    #[error("measurement is not a projective decomposition: {0}")]
    NotADecomposition(String),
    #[error("angle out of range [0, pi]: {0}")]
    OutOfRange(f64),
    #[error("invalid probability table: {0}")]
    InvalidTable(String),
    #[error("config error at {field}: {message}")]
    ConfigError { field: String, message: String },
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
