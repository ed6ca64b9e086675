use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field evaluated at its source point ({0})")]
    Singularity(&'static str),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("{what}: bound {bound:.3e} exceeds tolerance {tolerance:.3e}")]
    Tolerance {
        what: String,
        bound: f64,
        tolerance: f64,
    },

    #[error("{what}: not converged after {nodes} nodes (last value {last}, residual {residual:.3e})")]
    NotConverged {
        what: &'static str,
        last: Complex64,
        residual: f64,
        nodes: usize,
    },

    #[error("argument out of range: {0}")]
    Range(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }
}
