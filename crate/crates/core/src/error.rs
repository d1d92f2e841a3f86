use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("wavenumber k = 0 is excluded from the mean-zero space")]
    ZeroMode,

    #[error("resonance: i*omega (omega = {omega}) is within tolerance of an eigenvalue at k = {k}")]
    Resonance { omega: f64, k: i64 },

    #[error("degenerate cubic coefficient (|b| = {b:.3e}); higher-order terms required")]
    Degenerate { b: f64 },

    #[error("mu = {mu} lies on the non-bifurcating side")]
    NonBifurcatingSide { mu: f64 },

    #[error("blowup detected at t = {time}")]
    Blowup { time: f64 },

    #[error("no quasi-steady state reached by t = {time}")]
    NotConverged { time: f64 },

    #[error("admissibility rejected: {0}")]
    NotAdmissible(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
