//! Exact rational arithmetic and the exponent lattice.
//!
//! [`Rat`] is the coefficient type for every exact computation in the crate.
//! [`Exp`] is a machine-sized rational used for exponents of `t` (and, when
//! integral, of the family parameter). [`Bound`] extends `Exp` with an
//! infinite element and is used for truncation orders.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QarithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
}

/// Exact arbitrary-precision rational, always kept in lowest terms with a
/// positive denominator. Values whose parts fit in `i64` are stored inline
/// and only spill to big integers when an operation overflows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rat(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    // Reduced, den > 0, num > i64::MIN so that negation cannot overflow.
    Small(i64, i64),
    Big(BigRational),
}

impl Default for Rat {
    fn default() -> Self {
        Rat::zero()
    }
}

/// Reduces `n/d` (with `d != 0`) and picks the representation.
fn from_i128(n: i128, d: i128) -> Rat {
    let (n, d) = if d < 0 { (-n, -d) } else { (n, d) };
    let g = n.unsigned_abs().gcd(&(d as u128)) as i128;
    let (n, d) = if g > 1 { (n / g, d / g) } else { (n, d) };
    match (i64::try_from(n), i64::try_from(d)) {
        (Ok(n), Ok(d)) if n != i64::MIN => Rat(Repr::Small(n, d)),
        _ => Rat(Repr::Big(BigRational::new_raw(n.into(), d.into()))),
    }
}

/// Canonical form of a reduced big rational.
fn from_big(r: BigRational) -> Rat {
    match (r.numer().to_i64(), r.denom().to_i64()) {
        (Some(n), Some(d)) if n != i64::MIN => Rat(Repr::Small(n, d)),
        _ => Rat(Repr::Big(r)),
    }
}

impl Rat {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, QarithError> {
        let den = den.into();
        if den.is_zero() {
            return Err(QarithError::DivisionByZero);
        }
        Ok(from_big(BigRational::new(num.into(), den)))
    }

    pub fn int(n: i64) -> Self {
        from_i128(n as i128, 1)
    }

    /// Shorthand for small literals. Panics on a zero denominator.
    pub fn frac(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        from_i128(num as i128, den as i128)
    }

    pub fn zero() -> Self {
        Rat(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Rat(Repr::Small(1, 1))
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(r) => r.is_integer(),
        }
    }

    pub fn signum(&self) -> Ordering {
        match &self.0 {
            Repr::Small(n, _) => n.cmp(&0),
            Repr::Big(r) => match r.numer().sign() {
                Sign::Minus => Ordering::Less,
                Sign::NoSign => Ordering::Equal,
                Sign::Plus => Ordering::Greater,
            },
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    pub fn checked_div(&self, other: &Rat) -> Result<Rat, QarithError> {
        if other.is_zero() {
            return Err(QarithError::DivisionByZero);
        }
        Ok(match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => from_i128(*a as i128 * *d as i128, *b as i128 * *c as i128),
            _ => from_big(self.to_big() / other.to_big()),
        })
    }

    pub fn recip(&self) -> Result<Rat, QarithError> {
        Rat::one().checked_div(self)
    }

    pub fn pow(&self, k: i32) -> Result<Rat, QarithError> {
        if k < 0 && self.is_zero() {
            return Err(QarithError::DivisionByZero);
        }
        Ok(from_big(num::pow::Pow::pow(&self.to_big(), k)))
    }

    /// Exact real `n`-th root, if one exists in the rationals. Negative
    /// inputs have a real root only for odd `n`.
    pub fn nth_root(&self, n: u32) -> Option<Rat> {
        assert!(n > 0);
        if n == 1 || self.is_zero() {
            return Some(self.clone());
        }
        let negative = self.signum() == Ordering::Less;
        if negative && n.is_multiple_of(2) {
            return None;
        }
        let num = self.numer().abs();
        let den = self.denom();
        let rn = num.nth_root(n);
        let rd = den.nth_root(n);
        if num::pow::Pow::pow(&rn, n) != num || num::pow::Pow::pow(&rd, n) != den {
            return None;
        }
        let root = from_big(BigRational::new(rn, rd));
        Some(if negative { -root } else { root })
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            // Ratio::to_f64 handles large numerators and denominators gracefully.
            Repr::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Nearest rational with denominator at most `max_den`, used for
    /// sampling and for converting short float literals.
    pub fn from_f64_approx(x: f64, max_den: i64) -> Option<Rat> {
        if !x.is_finite() {
            return None;
        }
        let mut best = Rat::int(x.round() as i64);
        let mut best_err = (x - best.to_f64()).abs();
        for den in 2..=max_den {
            let num = (x * den as f64).round() as i64;
            let cand = Rat::frac(num, den);
            let err = (x - cand.to_f64()).abs();
            if err < best_err {
                best = cand;
                best_err = err;
            }
        }
        Some(best)
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(r) => r.clone(),
        }
    }

    /// Normalizing an already reduced value is the identity.
    pub fn normalized(&self) -> Rat {
        from_big(BigRational::new(self.numer(), self.denom()))
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl From<BigRational> for Rat {
    fn from(r: BigRational) -> Self {
        from_big(r)
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::int(n)
    }
}

impl From<Exp> for Rat {
    fn from(e: Exp) -> Self {
        Rat::frac(e.num(), e.den())
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Repr::Big(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = QarithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || QarithError::Malformed(s.to_string());
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_negative() {
                    return Err(bad());
                }
                Rat::new(n, d)
            }
            None => Ok(from_big(BigRational::from_integer(s.parse().map_err(|_| bad())?))),
        }
    }
}

fn add_rat(x: &Rat, y: &Rat) -> Rat {
    match (&x.0, &y.0) {
        (Repr::Small(a, b), Repr::Small(c, d)) => {
            if b == d {
                from_i128(*a as i128 + *c as i128, *b as i128)
            } else {
                from_i128(*a as i128 * *d as i128 + *c as i128 * *b as i128, *b as i128 * *d as i128)
            }
        }
        _ => from_big(x.to_big() + y.to_big()),
    }
}

fn mul_rat(x: &Rat, y: &Rat) -> Rat {
    match (&x.0, &y.0) {
        (Repr::Small(a, b), Repr::Small(c, d)) => from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128),
        _ => from_big(x.to_big() * y.to_big()),
    }
}

fn sub_rat(x: &Rat, y: &Rat) -> Rat {
    add_rat(x, &-y)
}

// Panics on a zero divisor, like the primitive integer types.
fn div_rat(x: &Rat, y: &Rat) -> Rat {
    x.checked_div(y).expect("division by zero")
}

macro_rules! rat_binop {
    ($trait:ident, $method:ident, $f:ident) => {
        impl $trait<&Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                $f(self, rhs)
            }
        }
        impl $trait<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                $f(&self, &rhs)
            }
        }
        impl $trait<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                $f(&self, rhs)
            }
        }
    };
}

rat_binop!(Add, add, add_rat);
rat_binop!(Sub, sub, sub_rat);
rat_binop!(Mul, mul, mul_rat);
rat_binop!(Div, div, div_rat);

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match &self.0 {
            Repr::Small(n, d) => Rat(Repr::Small(-n, *d)),
            Repr::Big(r) => from_big(-r),
        }
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        -&self
    }
}

/// Binary rational operation selector for [`rat_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Cmp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RatResult {
    Value(Rat),
    Order(Ordering),
}

/// Dispatching form of the rational field operations. `Neg` ignores `b`.
pub fn rat_arith(op: RatOp, a: &Rat, b: &Rat) -> Result<RatResult, QarithError> {
    Ok(match op {
        RatOp::Add => RatResult::Value(a + b),
        RatOp::Sub => RatResult::Value(a - b),
        RatOp::Mul => RatResult::Value(a * b),
        RatOp::Div => RatResult::Value(a.checked_div(b)?),
        RatOp::Neg => RatResult::Value(-a),
        RatOp::Cmp => RatResult::Order(a.cmp(b)),
    })
}

/// Exponent of `t`: a small exact rational.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exp(num::rational::Ratio<i64>);

impl Exp {
    pub const ZERO: Exp = Exp(num::rational::Ratio::new_raw(0, 1));
    pub const ONE: Exp = Exp(num::rational::Ratio::new_raw(1, 1));

    pub fn new(num: i64, den: i64) -> Exp {
        assert!(den != 0, "exponent with zero denominator");
        Exp(num::rational::Ratio::new(num, den))
    }

    pub fn int(n: i64) -> Exp {
        Exp(num::rational::Ratio::from_integer(n))
    }

    pub fn num(&self) -> i64 {
        *self.0.numer()
    }

    pub fn den(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.num() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.num() < 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num() as f64 / self.den() as f64
    }

    pub fn floor(&self) -> i64 {
        num::Integer::div_floor(&self.num(), &self.den())
    }

    pub fn ceil(&self) -> i64 {
        -num::Integer::div_floor(&-self.num(), &self.den())
    }

    pub fn try_from_rat(r: &Rat) -> Option<Exp> {
        Some(Exp::new(r.numer().to_i64()?, r.denom().to_i64()?))
    }

    pub fn min(self, other: Exp) -> Exp {
        Ord::min(self, other)
    }

    pub fn max(self, other: Exp) -> Exp {
        Ord::max(self, other)
    }
}

impl fmt::Display for Exp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.num())
        } else {
            write!(f, "{}/{}", self.num(), self.den())
        }
    }
}

impl fmt::Debug for Exp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i64> for Exp {
    fn from(n: i64) -> Self {
        Exp::int(n)
    }
}

impl Add for Exp {
    type Output = Exp;
    fn add(self, rhs: Exp) -> Exp {
        Exp(self.0 + rhs.0)
    }
}

impl Sub for Exp {
    type Output = Exp;
    fn sub(self, rhs: Exp) -> Exp {
        Exp(self.0 - rhs.0)
    }
}

impl Mul for Exp {
    type Output = Exp;
    fn mul(self, rhs: Exp) -> Exp {
        Exp(self.0 * rhs.0)
    }
}

impl Mul<i64> for Exp {
    type Output = Exp;
    fn mul(self, rhs: i64) -> Exp {
        Exp(self.0 * rhs)
    }
}

impl Div for Exp {
    type Output = Exp;
    fn div(self, rhs: Exp) -> Exp {
        Exp(self.0 / rhs.0)
    }
}

impl Neg for Exp {
    type Output = Exp;
    fn neg(self) -> Exp {
        Exp(-self.0)
    }
}

/// An exponent or `+infinity`. Used for truncation orders, where infinity
/// marks an exactly known element.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Bound {
    Finite(Exp),
    Infinite,
}

impl Bound {
    pub fn finite(self) -> Option<Exp> {
        match self {
            Bound::Finite(e) => Some(e),
            Bound::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    pub fn shift(self, by: Exp) -> Bound {
        match self {
            Bound::Finite(e) => Bound::Finite(e + by),
            Bound::Infinite => Bound::Infinite,
        }
    }

    /// Sum of two bounds; infinity absorbs.
    pub fn plus(self, other: Bound) -> Bound {
        match (self, other) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a + b),
            _ => Bound::Infinite,
        }
    }

    /// Scaling by a positive exponent.
    pub fn scale(self, by: Exp) -> Bound {
        debug_assert!(by.is_positive());
        match self {
            Bound::Finite(e) => Bound::Finite(e * by),
            Bound::Infinite => Bound::Infinite,
        }
    }

    pub fn exceeds(self, e: Exp) -> bool {
        self > Bound::Finite(e)
    }
}

impl From<Exp> for Bound {
    fn from(e: Exp) -> Self {
        Bound::Finite(e)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(e) => write!(f, "{e}"),
            Bound::Infinite => write!(f, "inf"),
        }
    }
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

// Reports carry exact values as their textual form.
impl serde::Serialize for Rat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl serde::Serialize for Exp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl serde::Serialize for Bound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn add_fractions() {
        assert_eq!(Rat::frac(1, 2) + Rat::frac(1, 3), Rat::frac(5, 6));
    }

    #[test]
    fn mul_by_zero_annihilates() {
        assert!((Rat::frac(-7, 3) * Rat::zero()).is_zero());
        assert_eq!(Rat::frac(-7, 3) * Rat::zero(), Rat::new(0, 5).unwrap());
    }

    #[test]
    fn cmp_negative_fractions() {
        // -3/7 vs -2/5: -15 < -14 after cross multiplication by 35.
        let r = rat_arith(RatOp::Cmp, &Rat::frac(-3, 7), &Rat::frac(-2, 5)).unwrap();
        assert_eq!(r, RatResult::Order(Ordering::Less));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(rat_arith(RatOp::Div, &Rat::one(), &Rat::zero()), Err(QarithError::DivisionByZero));
        assert!(Rat::new(1, 0).is_err());
    }

    #[test]
    fn zero_is_canonical() {
        let z = Rat::new(0, -9).unwrap();
        assert_eq!(z.numer(), BigInt::from(0));
        assert_eq!(z.denom(), BigInt::from(1));
    }

    #[test]
    fn textual_form() {
        assert_eq!(Rat::frac(6, -4).to_string(), "-3/2");
        assert_eq!(Rat::int(5).to_string(), "5");
        assert_eq!("10/4".parse::<Rat>().unwrap(), Rat::frac(5, 2));
        assert!("1/0".parse::<Rat>().is_err());
        assert!("x".parse::<Rat>().is_err());
    }

    #[test]
    fn nth_roots() {
        assert_eq!(Rat::frac(16, 81).nth_root(4), Some(Rat::frac(2, 3)));
        assert_eq!(Rat::frac(-8, 27).nth_root(3), Some(Rat::frac(-2, 3)));
        assert_eq!(Rat::int(-4).nth_root(2), None);
        assert_eq!(Rat::int(2).nth_root(4), None);
    }

    #[test]
    fn exp_floor_ceil() {
        assert_eq!(Exp::new(-3, 2).floor(), -2);
        assert_eq!(Exp::new(-3, 2).ceil(), -1);
        assert_eq!(Exp::new(7, 3).ceil(), 3);
        assert!(Bound::Infinite > Bound::Finite(Exp::int(1_000_000)));
    }

    #[test]
    fn overflow_spills_and_returns() {
        let max = Rat::int(i64::MAX);
        let big = &max + &Rat::one();
        assert_eq!(big.to_string(), "9223372036854775808");
        assert_eq!(&big - &Rat::one(), max);
        assert_eq!(-Rat::int(i64::MIN), big);
        let tiny = Rat::frac(1, i64::MAX) * Rat::frac(1, 3);
        assert_eq!(tiny * Rat::int(3), Rat::frac(1, i64::MAX));
        assert!(Rat::int(i64::MIN) < Rat::int(i64::MIN + 1));
    }

    fn wide() -> impl Strategy<Value = (i64, i64)> {
        (any::<i64>(), 1i64..=i64::MAX)
    }

    proptest! {
        #[test]
        fn matches_big_rationals((a, b) in wide(), (c, d) in wide()) {
            let (x, y) = (Rat::frac(a, b), Rat::frac(c, d));
            let (bx, by) = (BigRational::new(a.into(), b.into()), BigRational::new(c.into(), d.into()));
            prop_assert_eq!((&x + &y).to_big(), &bx + &by);
            prop_assert_eq!((&x - &y).to_big(), &bx - &by);
            prop_assert_eq!((&x * &y).to_big(), &bx * &by);
            prop_assert_eq!(x.cmp(&y), bx.cmp(&by));
            if c != 0 {
                prop_assert_eq!((&x / &y).to_big(), &bx / &by);
            }
            prop_assert_eq!(Rat::from(bx.clone()), x);
        }
    }

    fn rat() -> impl Strategy<Value = Rat> {
        (-1000i64..1000, 1i64..200).prop_map(|(n, d)| Rat::frac(n, d))
    }

    proptest! {
        #[test]
        fn field_axioms(a in rat(), b in rat(), c in rat()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a + &(-&a)).is_zero());
            if !a.is_zero() {
                prop_assert_eq!(&a * &a.recip().unwrap(), Rat::one());
            }
        }

        #[test]
        fn normalization_is_idempotent(n in -10_000i64..10_000, d in 1i64..10_000) {
            let once = Rat::frac(n, d);
            prop_assert_eq!(once.normalized(), once.clone());
            prop_assert_eq!(once.normalized().normalized(), once);
        }
    }
}
