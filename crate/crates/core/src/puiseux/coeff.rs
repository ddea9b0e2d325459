use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::qarith::{Exp, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoeffError {
    #[error("coefficient is not invertible")]
    NotInvertible,
    #[error("even root of a negative coefficient")]
    NegativeEvenRoot,
    #[error("root of the coefficient is not rational")]
    IrrationalRoot,
}

/// Coefficient ring of a series.
///
/// Implemented by [`Rat`] (exact mode), `f64` (numeric mode) and
/// [`crate::param::LaurentEps`] (families in a parameter). A computation picks
/// one coefficient type and keeps it throughout; nothing converts silently.
pub trait Coeff: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    /// Whether arithmetic on this type is exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_rat(r: &Rat) -> Self;

    fn scale(&self, r: &Rat) -> Self {
        self.mul(&Self::from_rat(r))
    }

    /// Multiplicative inverse, for units of the ring.
    fn inverse(&self) -> Result<Self, CoeffError>;

    /// Real principal `n`-th root.
    fn root(&self, n: u32) -> Result<Self, CoeffError>;

    /// Sign of the coefficient. For parametric coefficients this is the
    /// sign for small positive values of the parameter.
    fn sign(&self) -> Ordering;

    /// Size estimate used by inexact types to detect cancellation.
    fn magnitude(&self) -> f64 {
        0.0
    }

    /// Clears a value that is pure cancellation noise relative to
    /// `magnitude`, the total size of the terms that produced it.
    fn settle(self, _magnitude: f64) -> Self {
        self
    }

    fn render(&self) -> String;

    /// `self^e` for a rational exponent: root by the denominator, then
    /// integer power.
    fn rat_pow(&self, e: Exp) -> Result<Self, CoeffError> {
        let base = if e.den() == 1 { self.clone() } else { self.root(e.den() as u32)? };
        let k = e.num();
        let base = if k < 0 { base.inverse()? } else { base };
        let mut acc = Self::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }
}

impl Coeff for Rat {
    const EXACT: bool = true;

    fn zero() -> Self {
        Rat::zero()
    }
    fn one() -> Self {
        Rat::one()
    }
    fn is_zero(&self) -> bool {
        Rat::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn inverse(&self) -> Result<Self, CoeffError> {
        self.recip().map_err(|_| CoeffError::NotInvertible)
    }
    fn root(&self, n: u32) -> Result<Self, CoeffError> {
        if n.is_multiple_of(2) && self.signum() == Ordering::Less {
            return Err(CoeffError::NegativeEvenRoot);
        }
        self.nth_root(n).ok_or(CoeffError::IrrationalRoot)
    }
    fn sign(&self) -> Ordering {
        self.signum()
    }
    fn render(&self) -> String {
        self.to_string()
    }
    fn rat_pow(&self, e: Exp) -> Result<Self, CoeffError> {
        let base = if e.den() == 1 { self.clone() } else { self.root(e.den() as u32)? };
        base.pow(e.num() as i32).map_err(|_| CoeffError::NotInvertible)
    }
}

/// Relative size below which a float sum counts as complete cancellation.
pub const FLOAT_CANCEL_TOL: f64 = 1e-10;

impl Coeff for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        (self + other).settle(self.abs() + other.abs())
    }
    fn sub(&self, other: &Self) -> Self {
        (self - other).settle(self.abs() + other.abs())
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rat(r: &Rat) -> Self {
        r.to_f64()
    }
    fn inverse(&self) -> Result<Self, CoeffError> {
        if *self == 0.0 {
            Err(CoeffError::NotInvertible)
        } else {
            Ok(1.0 / self)
        }
    }
    fn root(&self, n: u32) -> Result<Self, CoeffError> {
        if *self < 0.0 {
            if n.is_multiple_of(2) {
                return Err(CoeffError::NegativeEvenRoot);
            }
            return Ok(-(-self).powf(1.0 / n as f64));
        }
        Ok(self.powf(1.0 / n as f64))
    }
    fn sign(&self) -> Ordering {
        self.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn settle(self, magnitude: f64) -> Self {
        if self.abs() <= FLOAT_CANCEL_TOL * magnitude || self.abs() < 1e-300 {
            0.0
        } else {
            self
        }
    }
    fn render(&self) -> String {
        format!("{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_power_of_coefficients() {
        assert_eq!(Rat::int(16).rat_pow(Exp::new(3, 4)), Ok(Rat::int(8)));
        assert_eq!(Rat::int(4).rat_pow(Exp::new(-1, 2)), Ok(Rat::frac(1, 2)));
        assert_eq!(Rat::int(2).rat_pow(Exp::new(1, 4)), Err(CoeffError::IrrationalRoot));
        assert_eq!(Rat::int(-1).rat_pow(Exp::new(1, 2)), Err(CoeffError::NegativeEvenRoot));
        assert_eq!(Rat::int(-8).rat_pow(Exp::new(2, 3)), Ok(Rat::int(4)));
    }

    #[test]
    fn float_cancellation_settles_to_zero() {
        let a = 0.1 + 0.2;
        assert_eq!(Coeff::sub(&a, &0.3), 0.0);
        assert_ne!(Coeff::sub(&0.3000001, &0.3), 0.0);
        assert!((2.0f64.root(4).unwrap() - 2f64.powf(0.25)).abs() < 1e-15);
        assert_eq!((-27.0f64).root(3).unwrap(), -3.0);
    }
}
