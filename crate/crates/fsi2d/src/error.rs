//! Error taxonomy shared across the solver.

use thiserror::Error;

/// Top-level error type.
///
/// `Degeneracy` is a recoverable run outcome (the channel wall reached the
/// minimum-radius guard), not a bug; drivers report it and halt cleanly.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("domain degeneracy at t = {time}: 1 + eta/R = {radius:.6e} at z = {z:.6e} (guard {guard:.6e})")]
    Degeneracy {
        time: f64,
        z: f64,
        radius: f64,
        guard: f64,
    },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("audit failure: {0}")]
    Audit(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(vec![msg.into()])
    }

    /// Process exit code convention used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Degeneracy { .. } => 3,
            Error::Audit(_) => 4,
            Error::Solver(_) => 5,
            Error::Mesh(_) | Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
