//! Codings, fiber sets and fractal dimensions for intersections of a middle
//! Cantor set `C_λ` with its translate `C_λ + t`, for `λ` in `(0, 1/3]`.
//!
//! Real values are carried as [`RealScalar`] balls. Sequences over
//! `{-1, 0, 1}` are [`PeriodicCoding`] values in canonical form.

pub mod bisect;
pub mod coding;
pub mod dimension;
pub mod error;
pub mod fiberset;
pub mod projection;
pub mod scalar;
pub mod sequence;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{Interval, RealScalar, DEFAULT_PRECISION, MIN_PRECISION};
pub use sequence::{Digit, FrequencyStats, PeriodicCoding, Word};

/// Environment variable that overrides the default working precision (bits).
pub const PRECISION_ENV: &str = "CANTOR_FIBER_PRECISION";

/// Working precision from the environment, falling back to the default.
pub fn precision_from_env() -> usize {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map(|p| p.max(MIN_PRECISION))
        .unwrap_or(DEFAULT_PRECISION)
}
