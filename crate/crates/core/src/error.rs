use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),

    #[error(
        "point lies in the minimizer set (distance {distance:.3e} < exclusion {exclusion:.3e})"
    )]
    ExcludedPoint { distance: f64, exclusion: f64 },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("incompatible perturbation: {0}")]
    IncompatiblePerturbation(String),

    #[error("perturbation changes the minimizer structure: {0}")]
    PerturbationChangesMinimizers(String),

    #[error("condition kind mismatch: expected {expected}, got {got}")]
    KindMismatch { expected: String, got: String },

    #[error("conversion domain violation: {0}")]
    ConversionDomain(String),

    #[error("no rate guarantee: {0}")]
    NoGuarantee(String),

    #[error("unknown label: {0}")]
    UnknownLabel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
