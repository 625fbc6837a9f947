use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid support region: {0}")]
    InvalidSupport(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid cost spec: {0}")]
    InvalidCostSpec(String),

    #[error("shift {shift} hits spectrum during factorization; retry with jitter")]
    ShiftHitsSpectrum { shift: f64 },

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("internal consistency: {0}")]
    CountMismatch(String),

    #[error("no bound state: {0}")]
    NoBoundState(String),

    #[error("nonsmooth point: {0}")]
    NonsmoothPoint(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("infeasible iterate: {0}")]
    Infeasible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("hypothesis check rejected the cost spec:\n{0}")]
    HypothesisRejected(String),

    #[error("constants registry: {0}")]
    Registry(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
