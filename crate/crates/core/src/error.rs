//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by lattice construction, evolution, and analysis.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Graph or matrix size was zero or otherwise unusable.
    #[error("invalid size: {0}")]
    InvalidSize(String),

    /// Two operands that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A vertex label fell outside the graph's label range.
    #[error("vertex {label} out of range [{min}, {max}]")]
    VertexOutOfRange { label: i64, min: i64, max: i64 },

    /// A scalar parameter failed validation.
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// A linear-algebra kernel failed to converge or produced non-finite values.
    #[error("numerical failure in {context}: {details}")]
    NumericalFailure {
        context: &'static str,
        details: String,
    },

    /// The light-cone guard tripped: too much probability reached the
    /// truncation boundary for the run to stand in for an infinite line.
    #[error(
        "truncation guard violated at t = {time}: boundary probability {boundary_probability:.3e} \
         exceeds {limit:.1e}; enlarge the lattice"
    )]
    TruncationGuard {
        time: f64,
        boundary_probability: f64,
        limit: f64,
    },

    /// A requested accuracy cannot be met with the given discretization.
    #[error("accuracy error in {context}: {details}")]
    Accuracy {
        context: &'static str,
        details: String,
    },

    /// The Taylor series lost too many digits to cancellation to be trusted.
    #[error(
        "series cancellation guard tripped at order {order}: \
         partial sums reached {max_partial:.3e} against result {result:.3e}"
    )]
    SeriesDivergence {
        order: usize,
        max_partial: f64,
        result: f64,
    },

    /// A probability vector does not sum to one.
    #[error("distribution not normalized: sums to {sum}")]
    NotNormalized { sum: f64 },

    /// A regression window contained too few usable points.
    #[error("too few points for fit: need {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    /// A fitted exponent outside the diffusion model's range [0, 2].
    #[error("scaling exponent {alpha} outside the modeled range [0, 2]")]
    OutOfModel { alpha: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
