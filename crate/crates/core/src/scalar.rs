//! Payoff number types and tolerance-aware comparison.
//!
//! Two numeric modes are supported. `i64` payoffs are compared exactly;
//! `f64` payoffs are compared against a threshold of `epsilon * max(1, scale)`
//! where `scale` is the largest magnitude in the table under inspection.

use std::fmt::{Debug, Display};
use std::ops::{Add, Neg, Sub};

use serde::Serialize;

/// Largest integer payoff magnitude accepted in exact mode.
///
/// Every quantity the analyses compute is a sum of at most a few thousand
/// payoff differences, which stays far inside `i64` under this bound.
pub const MAX_EXACT_MAGNITUDE: i64 = 1 << 48;

/// Default comparison tolerance for float mode.
pub const DEFAULT_EPSILON: f64 = 1e-9;

pub trait Scalar:
    Copy
    + PartialOrd
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// `true` when arithmetic on this type is exact.
    const EXACT: bool;
    const ZERO: Self;

    fn abs(self) -> Self;
    fn to_f64(self) -> f64;
    fn from_i64(value: i64) -> Self;
    /// Checks a single payoff entry against the type's domain.
    fn check_entry(self) -> Result<(), EntryFault>;

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryFault {
    NonFinite,
    OutOfRange,
}

impl Scalar for i64 {
    const EXACT: bool = true;
    const ZERO: Self = 0;

    fn abs(self) -> Self {
        i64::abs(self)
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn from_i64(value: i64) -> Self {
        value
    }
    fn check_entry(self) -> Result<(), EntryFault> {
        if self.unsigned_abs() > MAX_EXACT_MAGNITUDE as u64 {
            Err(EntryFault::OutOfRange)
        } else {
            Ok(())
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const ZERO: Self = 0.0;

    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn from_i64(value: i64) -> Self {
        value as f64
    }
    fn check_entry(self) -> Result<(), EntryFault> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(EntryFault::NonFinite)
        }
    }
}

/// Sign classification of a quantity relative to a scaled threshold.
///
/// Exact types ignore the threshold entirely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    epsilon: f64,
    threshold: f64,
}

impl Tolerance {
    /// Builds a comparator for values whose natural magnitude is `scale`.
    pub fn scaled<T: Scalar>(epsilon: f64, scale: T) -> Self {
        let threshold = if T::EXACT {
            0.0
        } else {
            epsilon * scale.abs().to_f64().max(1.0)
        };
        Tolerance { epsilon, threshold }
    }

    /// Same epsilon, threshold multiplied by `factor`.
    pub fn widened(self, factor: f64) -> Self {
        Tolerance {
            epsilon: self.epsilon,
            threshold: self.threshold * factor,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn is_positive<T: Scalar>(&self, value: T) -> bool {
        if T::EXACT {
            value > T::ZERO
        } else {
            value.to_f64() > self.threshold
        }
    }

    pub fn is_negative<T: Scalar>(&self, value: T) -> bool {
        self.is_positive(-value)
    }

    pub fn is_zero<T: Scalar>(&self, value: T) -> bool {
        !self.is_positive(value) && !self.is_negative(value)
    }

    /// `a > b` beyond the threshold.
    pub fn exceeds<T: Scalar>(&self, a: T, b: T) -> bool {
        self.is_positive(a - b)
    }
}

/// Largest absolute value in a slice, `ZERO` for an empty slice.
pub fn max_abs<T: Scalar>(values: &[T]) -> T {
    values.iter().fold(T::ZERO, |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_mode_ignores_epsilon() {
        let tol = Tolerance::scaled(0.5, 100i64);
        assert!(tol.is_positive(1i64));
        assert!(tol.is_negative(-1i64));
        assert!(tol.is_zero(0i64));
    }

    #[test]
    fn float_threshold_scales_with_magnitude() {
        let tol = Tolerance::scaled(1e-9, 1000.0);
        assert!(tol.is_zero(5e-7));
        assert!(tol.is_positive(2e-6));
        let small = Tolerance::scaled(1e-9, 0.01);
        // scale is floored at one
        assert_eq!(small.threshold(), 1e-9);
    }

    #[test]
    fn entry_checks() {
        assert_eq!(f64::NAN.check_entry(), Err(EntryFault::NonFinite));
        assert_eq!(f64::INFINITY.check_entry(), Err(EntryFault::NonFinite));
        assert_eq!(
            (MAX_EXACT_MAGNITUDE + 1).check_entry(),
            Err(EntryFault::OutOfRange)
        );
        assert_eq!((-MAX_EXACT_MAGNITUDE).check_entry(), Ok(()));
    }
}
