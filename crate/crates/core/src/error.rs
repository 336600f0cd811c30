//! Crate-wide error type with an exit-code mapping used by the CLI.

use num_complex::Complex64;

/// Everything that can go wrong across the analysis pipeline.
///
/// The variants group into four families that the CLI maps onto process
/// exit codes: configuration/usage problems (2), hypothesis failures (3),
/// numerical-consistency failures (4), and I/O trouble (1).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Bad user input: dimensions, ranges, malformed config files.
    #[error("config error: {0}")]
    Config(String),

    /// The mathematical hypotheses the analysis needs do not hold for
    /// this system (gap growth, damping-vs-gap smallness, ...).
    #[error("out of hypothesis: {0}")]
    Hypothesis(String),

    /// Two routes that must agree did not, or a numerical gate failed.
    #[error("numerical consistency failure: {0}")]
    Numerical(String),

    /// A resolvent shift collided with the spectrum.
    #[error("singular shift: lambda = {lambda} is an eigenvalue (nearest spectrum point {nearest})")]
    SingularShift { lambda: Complex64, nearest: Complex64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit code the CLI reports for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Hypothesis(_) => 3,
            Error::Numerical(_) | Error::SingularShift { .. } => 4,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }

    /// Prefix the message with the pipeline stage that produced it.
    pub fn at_stage(self, stage: &str) -> Error {
        match self {
            Error::Config(m) => Error::Config(format!("[{stage}] {m}")),
            Error::Hypothesis(m) => Error::Hypothesis(format!("[{stage}] {m}")),
            Error::Numerical(m) => Error::Numerical(format!("[{stage}] {m}")),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
