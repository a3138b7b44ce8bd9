use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] avsfe_core::Error),
    /// Factorization failure or an unusable solution, with the block of the
    /// saddle system where it showed up.
    #[error("solver failure in the {block} block: {message}")]
    Solver {
        block: &'static str,
        message: String,
    },
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures raised by a linear solve (directly or inside a step).
    pub fn is_solver(&self) -> bool {
        match self {
            Error::Solver { .. } => true,
            Error::Step { source, .. } => source.is_solver(),
            _ => false,
        }
    }
}
