use thiserror::Error;

use crate::backends::BackendError;
use crate::geometry::GeometryError;

/// Failure while scoring one video or sample set.
#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("{context}: {source}")]
    Backend {
        context: String,
        #[source]
        source: BackendError,
    },
    /// The video cannot be scored for a content reason; becomes a typed outcome.
    #[error("unscorable: {0}")]
    Unscorable(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl ScoreError {
    pub(crate) fn backend(context: impl Into<String>) -> impl FnOnce(BackendError) -> ScoreError {
        let context = context.into();
        move |source| ScoreError::Backend { context, source }
    }

    /// Whether the failure is a backend fault rather than a property of the video.
    pub fn is_backend(&self) -> bool {
        matches!(self, ScoreError::Backend { .. })
    }
}
