use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The square-root loss is not differentiable at this point: the scaled
    /// residual norm `||y - X theta|| / sqrt(n)` dropped below the smoothness floor.
    #[error("residual norm {scaled_residual:e} (per sqrt(n)) is below the smoothness floor {floor:e}")]
    NonsmoothRegion { scaled_residual: f64, floor: f64 },

    #[error("response vector is identically zero")]
    ZeroResponse,

    /// A multitask solve entered the nonsmooth region on one of its tasks.
    #[error("task {task} entered the nonsmooth region at stage {stage}")]
    TaskNonsmooth { task: usize, stage: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                context,
                expected,
                actual,
            })
        }
    }
}
