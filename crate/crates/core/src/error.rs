use thiserror::Error;

/// Errors raised by the inference and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),

    #[error("time arrow is undetermined; a definite direction is required")]
    UndeterminedArrow,

    /// One of the two competing probabilities is zero (or negative), so the
    /// log-ratio is not a finite number.
    #[error("degenerate support: p_forward = {p_forward}, p_reversed = {p_reversed}")]
    DegenerateSupport { p_forward: f64, p_reversed: f64 },

    #[error("empty sample sequence")]
    EmptySamples,

    #[error("grid mismatch: expected {expected} points, got {actual}")]
    GridMismatch { expected: usize, actual: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("probability component {index} = {value:e} is below the floor {floor:e}")]
    BelowFloor {
        index: usize,
        value: f64,
        floor: f64,
    },

    #[error("final distribution must be flat (1/d in every component)")]
    NotFlat,

    #[error("type-class enumeration infeasible: {classes} classes exceed the limit {limit}")]
    InfeasibleEnumeration { classes: f64, limit: u64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("information change must be nonnegative, got {0}")]
    NegativeInformation(f64),

    #[error("invalid measurement outcome {0}; expected 0 or 1")]
    InvalidOutcome(u8),

    #[error("projector was built from a different spectrum")]
    SpectrumMismatch,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn finite(name: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(name))
    }
}
