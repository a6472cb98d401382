use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {message}")]
    Format { context: String, message: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("label uncertainty is undefined for an empty region")]
    EmptyRegion,

    #[error(
        "no placement satisfies the label-uncertainty constraint at iteration {iteration} \
         (best achievable LU {max_lu:.6}, {placed} balls already placed, {captured} points captured)"
    )]
    Infeasible {
        iteration: usize,
        max_lu: f64,
        placed: usize,
        captured: usize,
    },

    #[error("trial with seed {seed} failed: {source}")]
    Trial {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("bisection did not converge after {0} iterations")]
    Convergence(usize),

    #[error("unknown example id `{0}`")]
    UnknownId(String),

    #[error("threshold {0} abstains on every example")]
    EmptyRetained(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn format(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            context: context.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Strips trial context so callers can match on the underlying failure.
    pub fn root(&self) -> &Error {
        match self {
            Error::Trial { source, .. } => source.root(),
            other => other,
        }
    }

    /// Short machine-readable tag used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::Dimension { .. } => "dimension",
            Error::Domain(_) => "domain",
            Error::EmptyRegion => "empty_region",
            Error::Infeasible { .. } => "infeasible",
            Error::Convergence(_) => "convergence",
            Error::UnknownId(_) => "unknown_id",
            Error::EmptyRetained(_) => "empty_retained",
            Error::Config(_) => "config",
            Error::Json(_) => "json",
            Error::Trial { .. } => unreachable!("root() strips trial context"),
        }
    }

    /// Process exit code for the CLI. See the README for the table.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Config(_) => 2,
            Error::Io { .. } => 3,
            Error::Format { .. } | Error::Json(_) | Error::UnknownId(_) => 4,
            Error::Infeasible { .. } => 5,
            Error::Dimension { .. }
            | Error::Domain(_)
            | Error::EmptyRegion
            | Error::EmptyRetained(_)
            | Error::Convergence(_) => 6,
            Error::Trial { .. } => unreachable!("root() strips trial context"),
        }
    }
}
