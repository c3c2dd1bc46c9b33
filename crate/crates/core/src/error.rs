//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by the simulator and the numerical evaluators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Parameters violate a model invariant (a = 1, K ≠ 1, non-finite values, …).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Pure-power collision rate evaluated at zero velocity with no floor.
    #[error("degenerate velocity: collision rate is singular at |w| = 0")]
    DegenerateVelocity,
    /// Flight-time sampler exhausted its iteration budget.
    #[error("flight-time sampling did not terminate within {0} iterations")]
    NonTermination(usize),
    /// Flight density requested for v₂ = 0 (the flight is a point mass).
    #[error("flight density is a point mass when v2 = 0")]
    PointMassFlight,
    /// Jump density evaluated at v = ξ where the surface factor diverges.
    #[error("jump density factor diverges at v = xi")]
    Singular,
    /// Transition density evaluated on the rim of the sphere shadow.
    #[error("transition density evaluated at a tangent point (zero discriminant)")]
    TangentPoint,
    /// Profile evaluated where τ₀ = τ + log(1 − ξ₁/ξ₂) ≤ 0.
    #[error("characteristic start time tau0 = {0} is not positive")]
    NegativeTauZero(f64),
    /// Fixed-point iterate vanished on the whole grid.
    #[error("boundary iterate underflowed to zero")]
    Underflow,
    /// Exponent regression requested over too short a time range.
    #[error("insufficient time range for exponent fit: {decades:.2} decades")]
    InsufficientRange {
        /// Decades of t covered by the samples.
        decades: f64,
    },
    /// File-system failure, with the offending path.
    #[error("I/O error at {path}: {message}")]
    Io {
        /// Path being read or written.
        path: String,
        /// Underlying error message.
        message: String,
    },
    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
