//! Error types shared across the toolkit.

use thiserror::Error;

/// Unified error type for all toolkit operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data (negative node ids, bad edge-list lines, ...).
    #[error("format error: {0}")]
    Format(String),

    /// A caller-supplied argument violates a precondition.
    #[error("argument error: {0}")]
    Argument(String),

    /// A generator could not satisfy its constraints within its retry budget.
    #[error("generation error: {0}")]
    Generation(String),

    /// The requested computation exceeds a documented size budget.
    #[error("capability error: {0}")]
    Capability(String),

    /// Triplet sampling cannot proceed (e.g. a class with fewer than two graphs).
    #[error("sampling error: {0}")]
    Sampling(String),

    /// Training diverged or could not start.
    #[error("training error: {0}")]
    Training(String),

    /// A manifest or config file failed to load.
    #[error("load error: {0}")]
    Load(String),

    /// A stratified split is impossible for the given manifest.
    #[error("split error: {0}")]
    Split(String),

    /// A pipeline stage failed; carries the stage name for diagnostics.
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Name of the pipeline stage this error belongs to, if any.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
