use alloc::string::String;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("geometry conflict: {0}")]
    GeometryConflict(String),
    #[error("unknown tissue `{0}`")]
    UnknownTissue(String),
    #[error("scene needs {required} cells but the budget is {budget}")]
    Capacity { required: u64, budget: u64 },
    #[error("numerical divergence detected at step {step}")]
    NumericalDivergence { step: usize },
    #[error("missing data: {0}")]
    Missing(String),
    #[error("degenerate power budget: every component is zero")]
    DegenerateBudget,
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("phantom too small: no cell reaches the averaging mass inside the domain")]
    PhantomTooSmall,
    #[error("data error: {0}")]
    Data(String),
    #[error("validation error: {0}")]
    Validation(String),
}

pub type Result<T> = core::result::Result<T, Error>;
