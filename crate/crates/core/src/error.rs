use thiserror::Error;

pub type Result<T> = std::result::Result<T, KobError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KobError {
    #[error("dimension mismatch: domain has n = {expected}, argument has n = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point is not inside the domain: {0}")]
    OutsideDomain(String),

    #[error("nearest boundary point is not unique (candidates {0:?} and {1:?} differ)")]
    AmbiguousProjection(Vec<f64>, Vec<f64>),

    #[error("degenerate defining function: zero gradient at the boundary point")]
    DegenerateGradient,

    #[error("no closed form for this domain: {0}")]
    NoClosedForm(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate regression: {0}")]
    DegenerateFit(String),

    #[error("certified inclusion check failed: {0}")]
    InclusionFailed(String),

    #[error("soundness violation: {0}")]
    Soundness(String),
}

impl KobError {
    /// True for errors caused by bad inputs or unmet preconditions, as
    /// opposed to internal soundness failures.
    pub fn is_usage(&self) -> bool {
        !matches!(self, KobError::Soundness(_))
    }
}
