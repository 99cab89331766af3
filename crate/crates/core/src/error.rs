use thiserror::Error;

/// Failure modes shared across the library. Fallible operations return
/// `Result<T, Error>`; pure total functions return plain values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Probability vector failed validation (positivity, normalization, size).
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    /// Varentropy is zero within tolerance; the deformation parameter and the
    /// skewness corrections are undefined for such sources.
    #[error("degenerate source: varentropy is zero within tolerance")]
    DegenerateSource,

    /// An enumeration would exceed its hard size cap.
    #[error("size cap exceeded: {what} requires {size} items, cap is {cap}")]
    SizeCap { what: &'static str, size: u128, cap: u128 },

    /// A log-scale intermediate exceeded the exp overflow threshold.
    #[error("overflow: {what} = {value:.3e} exceeds exp threshold 700")]
    Overflow { what: &'static str, value: f64 },

    /// A moment or cumulant of the requested order was not computed.
    #[error("moment order {requested} exceeds available order {available}")]
    MomentOrder { requested: usize, available: usize },

    /// Too few Monte Carlo samples for the requested estimate.
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: u64, got: u64 },

    /// A log-log slope fit could not be performed (zero/non-finite spread).
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
