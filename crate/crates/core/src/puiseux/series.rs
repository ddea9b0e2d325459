use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};

use num::Integer;

use super::coeff::Coeff;
use super::SeriesError;
use crate::qarith::{Bound, Exp, Rat};

/// Default ceiling on the ramification index of any series.
pub const DEFAULT_RAM_CAP: u32 = 64;

static RAM_CAP: AtomicU32 = AtomicU32::new(DEFAULT_RAM_CAP);

/// Current process-wide ramification ceiling.
pub fn ram_cap() -> u32 {
    RAM_CAP.load(AtomicOrdering::Relaxed)
}

/// Sets the process-wide ramification ceiling. Values below 1 are clamped.
pub fn set_ram_cap(cap: u32) {
    RAM_CAP.store(cap.max(1), AtomicOrdering::Relaxed);
}

/// The `t`-adic valuation of a truncated series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    /// Least exponent carrying a nonzero coefficient.
    Order(Exp),
    /// No coefficient is known below the truncation order.
    ZeroUpToTruncation(Exp),
    /// Exactly zero.
    Zero,
}

impl Valuation {
    /// A lower bound on the true valuation.
    pub fn lower_bound(self) -> Bound {
        match self {
            Valuation::Order(e) | Valuation::ZeroUpToTruncation(e) => Bound::Finite(e),
            Valuation::Zero => Bound::Infinite,
        }
    }

    pub fn order(self) -> Option<Exp> {
        match self {
            Valuation::Order(e) => Some(e),
            _ => None,
        }
    }
}

/// A truncated Puiseux series `sum c_e t^e + O(t^trunc)`.
///
/// Terms are kept sorted by exponent with nonzero coefficients, all below
/// the truncation order. `trunc == Bound::Infinite` marks an exact element
/// (a polynomial in `t^(1/ram)`). The ramification index `ram` is the least
/// common denominator of the stored exponents.
#[derive(Clone, PartialEq)]
pub struct Series<C: Coeff = Rat> {
    terms: Vec<(Exp, C)>,
    trunc: Bound,
    ram: u64,
}

/// Exact-mode series with rational coefficients.
pub type PuiseuxSeries = Series<Rat>;

impl<C: Coeff> Series<C> {
    /// Builds a series from arbitrary terms; duplicates are summed, zero
    /// coefficients and terms at or beyond `trunc` are dropped.
    pub fn from_terms<I>(terms: I, trunc: Bound) -> Self
    where
        I: IntoIterator<Item = (Exp, C)>,
    {
        let mut map: BTreeMap<Exp, (C, f64)> = BTreeMap::new();
        for (e, c) in terms {
            if !trunc.exceeds(e) {
                continue;
            }
            let mag = c.magnitude();
            match map.get_mut(&e) {
                Some((acc, m)) => {
                    *acc = acc.add(&c);
                    *m += mag;
                }
                None => {
                    map.insert(e, (c, mag));
                }
            }
        }
        let terms = map.into_iter().map(|(e, (c, m))| (e, c.settle(m))).filter(|(_, c)| !c.is_zero()).collect();
        Self::from_sorted(terms, trunc)
    }

    /// Builds from terms already sorted, distinct, nonzero and below `trunc`.
    pub(crate) fn from_sorted(terms: Vec<(Exp, C)>, trunc: Bound) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(terms.iter().all(|(e, c)| trunc.exceeds(*e) && !c.is_zero()));
        let ram = terms.iter().fold(1u64, |acc, (e, _)| acc.lcm(&(e.den() as u64)));
        Series { terms, trunc, ram }
    }

    pub fn zero() -> Self {
        Self::from_sorted(Vec::new(), Bound::Infinite)
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(c, Exp::ZERO)
    }

    pub fn monomial(c: C, e: Exp) -> Self {
        Self::from_terms([(e, c)], Bound::Infinite)
    }

    /// The series `t`.
    pub fn t() -> Self {
        Self::monomial(C::one(), Exp::ONE)
    }

    /// `O(t^e)`: zero up to truncation at `e`.
    pub fn big_o(e: Exp) -> Self {
        Self::from_sorted(Vec::new(), Bound::Finite(e))
    }

    pub fn terms(&self) -> &[(Exp, C)] {
        &self.terms
    }

    pub fn trunc(&self) -> Bound {
        self.trunc
    }

    pub fn ram(&self) -> u64 {
        self.ram
    }

    pub fn is_exact(&self) -> bool {
        !self.trunc.is_finite()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.is_exact()
    }

    /// True when no coefficient is known to be nonzero.
    pub fn is_zero_up_to_truncation(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<(Exp, &C)> {
        self.terms.first().map(|(e, c)| (*e, c))
    }

    /// Coefficient at `e` if it is known (`None` at or beyond truncation).
    pub fn coeff(&self, e: Exp) -> Option<C> {
        if !self.trunc.exceeds(e) {
            return None;
        }
        Some(
            self.terms
                .binary_search_by(|(x, _)| x.cmp(&e))
                .map(|i| self.terms[i].1.clone())
                .unwrap_or_else(|_| C::zero()),
        )
    }

    pub fn valuation(&self) -> Valuation {
        match (self.terms.first(), self.trunc) {
            (Some((e, _)), _) => Valuation::Order(*e),
            (None, Bound::Finite(e)) => Valuation::ZeroUpToTruncation(e),
            (None, Bound::Infinite) => Valuation::Zero,
        }
    }

    pub fn ord(&self) -> Valuation {
        self.valuation()
    }

    /// Drops all knowledge at and beyond `bound`.
    pub fn truncate(&self, bound: Bound) -> Self {
        if bound >= self.trunc {
            return self.clone();
        }
        let terms = self.terms.iter().take_while(|(e, _)| bound.exceeds(*e)).cloned().collect();
        Self::from_sorted(terms, bound)
    }

    /// Errors if the ramification index exceeds the process-wide ceiling.
    pub fn check_ram(&self) -> Result<(), SeriesError> {
        check_ram_value(self.ram)
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Series<D> {
        Series::from_terms(self.terms.iter().map(|(e, c)| (*e, f(c))), self.trunc)
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            // 0 * (known part + O(t^T)) is exactly zero.
            return Self::zero();
        }
        Self::from_terms(self.terms.iter().map(|(e, x)| (*e, x.mul(c))), self.trunc)
    }

    /// Multiplies by `t^by`.
    pub fn shift(&self, by: Exp) -> Self {
        Self::from_sorted(self.terms.iter().map(|(e, c)| (*e + by, c.clone())).collect(), self.trunc.shift(by))
    }

    /// Substitutes `t -> t^k` for a positive exponent `k`.
    pub fn stretch(&self, k: Exp) -> Self {
        assert!(k.is_positive(), "stretch factor must be positive");
        Self::from_sorted(self.terms.iter().map(|(e, c)| (*e * k, c.clone())).collect(), self.trunc.scale(k))
    }

    pub fn add_series(&self, other: &Self) -> Self {
        let trunc = self.trunc.min(other.trunc);
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        loop {
            let next = match (a.get(i), b.get(j)) {
                (Some((ea, ca)), Some((eb, cb))) => match ea.cmp(eb) {
                    std::cmp::Ordering::Less => {
                        i += 1;
                        (*ea, ca.clone())
                    }
                    std::cmp::Ordering::Greater => {
                        j += 1;
                        (*eb, cb.clone())
                    }
                    std::cmp::Ordering::Equal => {
                        i += 1;
                        j += 1;
                        (*ea, ca.add(cb))
                    }
                },
                (Some((e, c)), None) => {
                    i += 1;
                    (*e, c.clone())
                }
                (None, Some((e, c))) => {
                    j += 1;
                    (*e, c.clone())
                }
                (None, None) => break,
            };
            if !trunc.exceeds(next.0) {
                break;
            }
            if !next.1.is_zero() {
                out.push(next);
            }
        }
        Self::from_sorted(out, trunc)
    }

    pub fn neg_series(&self) -> Self {
        Self::from_sorted(self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(), self.trunc)
    }

    pub fn sub_series(&self, other: &Self) -> Self {
        self.add_series(&other.neg_series())
    }

    /// Truncation order of a product, from the valuation lower bounds.
    fn product_trunc(&self, other: &Self) -> Bound {
        let va = self.valuation().lower_bound();
        let vb = other.valuation().lower_bound();
        va.plus(other.trunc).min(vb.plus(self.trunc))
    }

    pub fn mul_series(&self, other: &Self) -> Self {
        self.mul_trunc(other, Bound::Infinite)
    }

    /// Product with all knowledge at and beyond `cap` discarded.
    pub fn mul_trunc(&self, other: &Self, cap: Bound) -> Self {
        let trunc = self.product_trunc(other).min(cap);
        let mut acc: BTreeMap<Exp, (C, f64)> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = *ea + *eb;
                if !trunc.exceeds(e) {
                    // Exponents of `other` are increasing.
                    break;
                }
                let p = ca.mul(cb);
                let m = p.magnitude();
                match acc.get_mut(&e) {
                    Some((s, mag)) => {
                        *s = s.add(&p);
                        *mag += m;
                    }
                    None => {
                        acc.insert(e, (p, m));
                    }
                }
            }
        }
        let terms = acc.into_iter().map(|(e, (c, m))| (e, c.settle(m))).filter(|(_, c)| !c.is_zero()).collect();
        Self::from_sorted(terms, trunc)
    }

    /// `self^k` for a natural `k`, with knowledge capped at `cap`.
    pub fn pow_nat(&self, k: u32, cap: Bound) -> Self {
        let mut result = Self::one().truncate(cap);
        let mut base = self.truncate(cap);
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul_trunc(&base, cap);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_trunc(&base, cap);
            }
        }
        result
    }

    /// Evaluates the known part at a numeric `t > 0`.
    pub fn eval_f64(&self, t: f64, coeff: impl Fn(&C) -> f64) -> f64 {
        self.terms.iter().map(|(e, c)| coeff(c) * t.powf(e.to_f64())).sum()
    }
}

pub(crate) fn check_ram_value(ram: u64) -> Result<(), SeriesError> {
    let cap = ram_cap();
    if ram > cap as u64 {
        Err(SeriesError::RamificationCap { needed: ram, cap })
    } else {
        Ok(())
    }
}

impl<C: Coeff> fmt::Debug for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parser::render_series_with(self, |c| c.render()))
    }
}

impl<C: Coeff> fmt::Display for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parser::render_series_with(self, |c| c.render()))
    }
}

macro_rules! series_binop {
    ($trait:ident, $method:ident, $impl_fn:ident) => {
        impl<C: Coeff> $trait<&Series<C>> for &Series<C> {
            type Output = Series<C>;
            fn $method(self, rhs: &Series<C>) -> Series<C> {
                self.$impl_fn(rhs)
            }
        }
        impl<C: Coeff> $trait<Series<C>> for Series<C> {
            type Output = Series<C>;
            fn $method(self, rhs: Series<C>) -> Series<C> {
                (&self).$impl_fn(&rhs)
            }
        }
        impl<C: Coeff> $trait<&Series<C>> for Series<C> {
            type Output = Series<C>;
            fn $method(self, rhs: &Series<C>) -> Series<C> {
                (&self).$impl_fn(rhs)
            }
        }
    };
}

series_binop!(Add, add, add_series);
series_binop!(Sub, sub, sub_series);
series_binop!(Mul, mul, mul_series);

impl<C: Coeff> Neg for &Series<C> {
    type Output = Series<C>;
    fn neg(self) -> Series<C> {
        self.neg_series()
    }
}

impl<C: Coeff> Neg for Series<C> {
    type Output = Series<C>;
    fn neg(self) -> Series<C> {
        self.neg_series()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: i64, d: i64) -> Exp {
        Exp::new(n, d)
    }

    fn s(terms: &[(i64, i64, i64, i64)], trunc: Option<Exp>) -> PuiseuxSeries {
        Series::from_terms(
            terms.iter().map(|&(n, d, p, q)| (e(n, d), Rat::frac(p, q))),
            trunc.map_or(Bound::Infinite, Bound::Finite),
        )
    }

    #[test]
    fn cancellation_in_addition() {
        let f = s(&[(1, 1, 1, 1), (2, 1, 1, 1)], None);
        let g = s(&[(1, 1, -1, 1)], None);
        let r = &f + &g;
        assert_eq!(r, s(&[(2, 1, 1, 1)], None));
        assert!(r.is_exact());
        assert_eq!(&f + &PuiseuxSeries::zero(), f);
    }

    #[test]
    fn addition_refines_ramification() {
        let f = s(&[(1, 2, 1, 1)], Some(Exp::int(2)));
        let g = s(&[(1, 3, 1, 1)], None);
        let r = &f + &g;
        assert_eq!(r.ram(), 6);
        assert_eq!(r.terms().len(), 2);
        assert_eq!(r.terms()[0].0, e(1, 3));
        assert_eq!(r.terms()[1].0, e(1, 2));
        assert_eq!(r.trunc(), Bound::Finite(Exp::int(2)));
    }

    #[test]
    fn products() {
        let t = PuiseuxSeries::t();
        let sqrt_t = s(&[(1, 2, 1, 1)], None);
        assert_eq!(&t * &sqrt_t, s(&[(3, 2, 1, 1)], None));
        let a = s(&[(0, 1, 1, 1), (1, 1, 1, 1)], None);
        let b = s(&[(0, 1, 1, 1), (1, 1, -1, 1)], None);
        assert_eq!(&a * &b, s(&[(0, 1, 1, 1), (2, 1, -1, 1)], None));
        // (t + O(t^3)) (t^-1 + 1) = 1 + t + O(t^2)
        let f = s(&[(1, 1, 1, 1)], Some(Exp::int(3)));
        let g = s(&[(-1, 1, 1, 1), (0, 1, 1, 1)], None);
        assert_eq!(&f * &g, s(&[(0, 1, 1, 1), (1, 1, 1, 1)], Some(Exp::int(2))));
    }

    #[test]
    fn product_with_unknown_factor() {
        let f = PuiseuxSeries::big_o(Exp::int(2));
        let g = s(&[(1, 1, 3, 1)], Some(Exp::int(4)));
        let p = &f * &g;
        assert_eq!(p.valuation(), Valuation::ZeroUpToTruncation(Exp::int(3)));
        assert!((&PuiseuxSeries::zero() * &g).is_exact_zero());
    }

    #[test]
    fn valuations() {
        assert_eq!(s(&[(3, 1, 1, 1), (5, 1, -2, 1)], None).ord(), Valuation::Order(Exp::int(3)));
        assert_eq!(PuiseuxSeries::big_o(Exp::int(7)).ord(), Valuation::ZeroUpToTruncation(Exp::int(7)));
        assert_eq!(s(&[(1, 2, 1, 1), (1, 1, 1, 1)], None).ord(), Valuation::Order(e(1, 2)));
        assert_eq!(PuiseuxSeries::zero().ord(), Valuation::Zero);
    }

    #[test]
    fn ram_is_lcm_of_term_denominators() {
        let f = s(&[(1, 4, 1, 1), (1, 6, 2, 1)], Some(e(7, 5)));
        assert_eq!(f.ram(), 12);
    }

    #[test]
    fn pow_nat_matches_repeated_product() {
        let f = s(&[(1, 1, 1, 1), (2, 1, 1, 1)], None);
        let cube = f.pow_nat(3, Bound::Infinite);
        assert_eq!(cube, &(&f * &f) * &f);
        assert_eq!(f.pow_nat(0, Bound::Infinite), PuiseuxSeries::one());
    }
}
