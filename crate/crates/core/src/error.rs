use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("contracting cone vanished: radius {radius} at t = {t}")]
    ConeVanished { radius: f64, t: f64 },

    #[error("numerical instability at step {step}: {detail}")]
    Instability { step: usize, detail: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Twin-run inputs disagreed somewhere they were required to agree.
    #[error("initial states disagree inside the base region at sites {sites:?}")]
    Disagreement { sites: Vec<usize> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("gamma-matrix algebra corrupted: imaginary part {0:e} in a real bilinear")]
    GammaAlgebra(f64),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
