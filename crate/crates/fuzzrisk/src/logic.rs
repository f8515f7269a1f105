//! Fuzzy logical operators on membership degrees.
//!
//! AND is min, OR is max, NOT is `1 - x`. On Boolean degrees these
//! reduce exactly to the classical connectives, and because 0 and 1 are
//! exact in floating point, De Morgan's laws and double negation hold
//! bit-for-bit, not just approximately.

use thiserror::Error;

#[derive(Debug, Error)]
#[error("membership degree must lie in [0, 1], got {0}")]
pub struct DegreeError(pub f64);

/// A membership degree in `[0, 1]`. The constructor is the only way in,
/// so arithmetic on degrees never sees NaN or out-of-range values.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Degree(f64);

impl Degree {
    pub const ZERO: Degree = Degree(0.0);
    pub const ONE: Degree = Degree(1.0);

    pub fn new(value: f64) -> Result<Self, DegreeError> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(Degree(value))
        } else {
            Err(DegreeError(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Scales by a factor expected in `[0, 1]`; clamped so that a
    /// hand-built out-of-range factor cannot corrupt the invariant.
    pub(crate) fn scaled(self, factor: f64) -> Degree {
        debug_assert!((0.0..=1.0).contains(&factor));
        Degree((self.0 * factor).clamp(0.0, 1.0))
    }
}

pub fn fuzzy_and(a: Degree, b: Degree) -> Degree {
    Degree(a.0.min(b.0))
}

pub fn fuzzy_or(a: Degree, b: Degree) -> Degree {
    Degree(a.0.max(b.0))
}

/// Standard complement. `1 - x` is exact at the endpoints and stays in
/// `[0, 1]` for every degree, so no clamping is needed.
pub fn fuzzy_not(a: Degree) -> Degree {
    Degree(1.0 - a.0)
}
