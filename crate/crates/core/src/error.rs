use thiserror::Error;

/// Errors raised by spectrum ingestion, the Gibbs solver, bound evaluation
/// and the verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("spectrum has no levels")]
    EmptySpectrum,

    #[error("level {index} is not finite ({value})")]
    NonFiniteLevel { index: usize, value: f64 },

    #[error("tail generator cannot certify the Gibbs hypothesis: {0}")]
    NonMonotoneGenerator(String),

    #[error("operation needs at least {needed} levels, spectrum has {found}")]
    TooFewLevels { needed: usize, found: usize },

    #[error("inverse temperature {beta:e} is below the certified floor {floor:e}")]
    BetaTooSmall { beta: f64, floor: f64 },

    #[error("certified truncation needs {required} terms, limit is {limit}")]
    TruncationTooLarge { required: u64, limit: u64 },

    #[error("mean energy {energy} is not attainable (supremum {supremum})")]
    TargetEnergyUnattainable { energy: f64, supremum: f64 },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("argument {argument} is below the spectral gap h1 = {gap}")]
    ArgumentBelowGap { argument: f64, gap: f64 },

    #[error("sub-threshold branch reached with E/eps = {ratio} < h1 = {gap}")]
    InternalGapViolation { ratio: f64, gap: f64 },

    #[error("distribution support exceeds the spectrum ({support} > {levels})")]
    IncompatibleSupport { support: usize, levels: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NonHermitianInput { deviation: f64 },

    #[error("dimension {dim} exceeds the supported maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("malformed spectrum file: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
