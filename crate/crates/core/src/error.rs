use alloc::string::String;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("sector {n} carries no weight")]
    EmptySector { n: usize },
    #[error("truncation discards norm {discarded:e}, above the allowed {allowed:e}")]
    Truncation { discarded: f64, allowed: f64 },
    #[error("outcome {outcome} has zero probability but nonzero derivative")]
    SingularModel { outcome: usize },
    #[error("Fisher information vanishes, variance bound is unbounded")]
    UnboundedVariance,
    #[error("data has zero likelihood everywhere on the parameter domain")]
    InfeasibleData,
    #[error("derivative is not norm preserving: Re<psi|dpsi> = {real_overlap:e}")]
    InconsistentDerivative { real_overlap: f64 },
    #[error("signal derivative vanishes, precision diverges")]
    DivergingPrecision,
    #[error("phase conversion factor diverges (cos theta = 0)")]
    DivergingConversion,
    #[error("{what} needs {requested} particles, cap is {cap}")]
    ResourceLimit { what: &'static str, requested: usize, cap: usize },
    #[error("channel derivative vanishes, no tangent direction")]
    UndefinedDirection,
    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
