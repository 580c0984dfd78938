//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument or malformed input (CLI exit code 2).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A file in one of the curve text formats failed to parse.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Operation requires a regular curve (min |gamma'| > 0).
    #[error("curve is not regular: min |gamma'| = {min_speed:e}")]
    NonRegular { min_speed: f64 },

    /// Chord length collapsed below the guard threshold away from the diagonal.
    #[error("self-intersection detected: chord {chord:e} at u={u}, w={w}")]
    SelfIntersection { u: f64, w: f64, chord: f64 },

    /// Numerical convergence failure (CLI exit code 3).
    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Convergence(_) => 3,
            _ => 2,
        }
    }
}
