use thiserror::Error;

/// Failures raised anywhere in the reduction, synthesis and simulation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration diverged at step {step} (t = {time})")]
    IntegrationDiverged { step: usize, time: f64 },

    #[error("no limit cycle found: {0}")]
    NoLimitCycle(String),

    #[error("limit cycle not converged: peak intervals vary by {relative_spread:e} (relative)")]
    NotConverged { relative_spread: f64 },

    #[error("insufficient resolution: {samples} samples cannot support order {order}")]
    InsufficientResolution { samples: usize, order: usize },

    #[error("degenerate monodromy matrix: no Floquet multiplier within {tolerance:e} of 1 (closest {closest})")]
    DegenerateMonodromy { tolerance: f64, closest: f64 },

    #[error("eigenvector extraction did not converge at theta = {theta}")]
    EigenvectorNotConverged { theta: f64 },

    #[error("singular PRC normalization at theta = {theta} (mu^T f = {value:e})")]
    SingularNormalization { theta: f64, value: f64 },

    #[error("adjoint integration unstable after {periods} periods (residual {residual:e}); use the projection method")]
    AdjointUnstable { periods: usize, residual: f64 },

    #[error("ratio {n}:{m} must be coprime positive integers")]
    NonCoprimeRatio { n: u32, m: u32 },

    #[error("entrainment impossible: {0}")]
    EntrainmentImpossible(String),

    #[error("undefined large-N limit: mean of the PRC is zero")]
    UndefinedLimit,

    #[error(
        "infeasible energy {requested:e}: must exceed the minimum feasible energy {minimum:e}"
    )]
    InfeasibleEnergy { requested: f64, minimum: f64 },

    #[error("no locking-range gain: V is flat (V0 - V* = {gap:e})")]
    NoRangeGain { gap: f64 },

    #[error("no Arnold tongue: interaction function vanishes")]
    NoTongue,

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("insufficient decay for rate estimation: {0}")]
    InsufficientDecay(String),

    #[error("no boundary found: {0}")]
    NoBoundaryFound(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    /// True for requests that are well-formed but cannot be satisfied
    /// (infeasible energies, impossible entrainment).
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::InfeasibleEnergy { .. }
                | Error::EntrainmentImpossible(_)
                | Error::NoRangeGain { .. }
                | Error::NoTongue
                | Error::UndefinedLimit
                | Error::InsufficientDecay(_)
        )
    }

    /// True for malformed requests.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::NonCoprimeRatio { .. } | Error::Serialization(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
