//! Field operations that need an expansion: inverse, rational powers,
//! substitution and reparametrization.
//!
//! Every operation that may produce an infinite expansion takes an absolute
//! `order`; the expansion is cut there. Results that are finite (inverse of a
//! monomial, integer power of a polynomial) stay exact regardless of `order`.

use std::cmp::Ordering;

use super::coeff::{Coeff, CoeffError};
use super::series::{Series, Valuation};
use super::SeriesError;
use crate::qarith::{Bound, Exp, Rat};

/// Limit of a germ as `t -> 0+`.
#[derive(Debug, Clone, PartialEq)]
pub enum Limit<C> {
    Value(C),
    Diverges,
    /// Nothing is known below a nonpositive truncation order.
    Undetermined(Exp),
}

fn coeff_err(e: CoeffError) -> SeriesError {
    match e {
        CoeffError::NotInvertible => SeriesError::NonUnitLeadingCoefficient,
        CoeffError::NegativeEvenRoot => SeriesError::NegativeBaseForEvenRoot,
        CoeffError::IrrationalRoot => SeriesError::IrrationalLeadingRoot,
    }
}

/// Generalized binomial coefficient `e (e-1) ... (e-k+1) / k!`.
fn binomial(e: &Rat, k: u32) -> Rat {
    let mut acc = Rat::one();
    for i in 0..k {
        acc = acc * (e - &Rat::int(i as i64)) / Rat::int(i as i64 + 1);
    }
    acc
}

/// `(1+u)^e` below relative order `r`, for `ord u > 0`.
///
/// With `f = 1+u` on the lattice of step `1/q`, `g = f^e` satisfies
/// `f g' = e f' g`, so `n g_n = sum_k ((e+1) k - n) f_k g_(n-k)`.
fn power_recurrence<C: Coeff>(u: &Series<C>, e: &Rat, r: Exp) -> Series<C> {
    let q = u.ram() as i64;
    let len = (r * Exp::int(q)).ceil().max(0) as usize;
    let f: Vec<(usize, C)> = u
        .terms()
        .iter()
        .map(|(x, c)| ((*x * Exp::int(q)).num() as usize, c.clone()))
        .filter(|(k, _)| *k < len)
        .collect();
    let e1 = e + &Rat::one();
    let mut g: Vec<C> = Vec::with_capacity(len);
    g.push(C::one());
    for n in 1..len {
        let mut acc = C::zero();
        let mut mag = 0.0;
        for (k, fk) in f.iter().take_while(|(k, _)| *k <= n) {
            let w = &(&e1 * &Rat::int(*k as i64)) - &Rat::int(n as i64);
            if w.is_zero() || g[n - k].is_zero() {
                continue;
            }
            let term = fk.mul(&g[n - k]).scale(&w);
            mag += term.magnitude();
            acc = acc.add(&term);
        }
        g.push(acc.settle(mag).scale(&Rat::frac(1, n as i64)));
    }
    let terms = g.into_iter().enumerate().map(|(n, c)| (Exp::new(n as i64, q), c));
    Series::from_terms(terms, Bound::Finite(r))
}

impl<C: Coeff> Series<C> {
    /// Splits `f = a t^v (1 + u)` with `ord u > 0`, returning `(v, a, u)`.
    fn unit_split(&self) -> Result<(Exp, C, Series<C>), SeriesError> {
        let (v, a) = match self.valuation() {
            Valuation::Order(v) => (v, self.leading().unwrap().1.clone()),
            Valuation::ZeroUpToTruncation(e) => return Err(SeriesError::ZeroUpToTruncation(e)),
            Valuation::Zero => return Err(SeriesError::DivisionByZero),
        };
        let a_inv = a.inverse().map_err(coeff_err)?;
        let u = self.shift(-v).scale(&a_inv) - Series::one();
        Ok((v, a, u))
    }

    /// `a^e t^(e v) (1+u)^e` by the binomial series, with relative
    /// precision bounded by the input's and by `order`.
    fn binomial_power(&self, e: Exp, lead_pow: C, order: Bound) -> Result<Series<C>, SeriesError> {
        let (v, _, u) = self.unit_split()?;
        let rel_input = self.trunc().shift(-v);
        if u.is_exact_zero() {
            // Power of a monomial: no expansion, so `order` does not apply.
            return Ok(Series::monomial(lead_pow, e * v).truncate(rel_input.shift(e * v)));
        }
        let rel = rel_input.min(order.shift(-(e * v)));
        let er = Rat::from(e);
        let terminating = e.is_integer() && !e.is_negative();
        let sum = match rel {
            Bound::Finite(r) => power_recurrence(&u, &er, r),
            Bound::Infinite if terminating => {
                let mut sum = Series::<C>::one();
                let mut upow = Series::<C>::one();
                for k in 1..=e.num() as u32 {
                    upow = upow.mul_series(&u);
                    sum = sum + upow.scale(&C::from_rat(&binomial(&er, k)));
                }
                sum
            }
            Bound::Infinite => return Err(SeriesError::PrecisionRequired),
        };
        let out = sum.truncate(rel).shift(e * v).scale(&lead_pow);
        Ok(match rel {
            // scale() turns O(.) into an exact zero only for a zero lead.
            Bound::Finite(r) => out.truncate(Bound::Finite(e * v + r)),
            Bound::Infinite => out,
        })
    }

    /// Multiplicative inverse, expanded up to `order`.
    pub fn inv(&self, order: Exp) -> Result<Series<C>, SeriesError> {
        self.inv_bounded(Bound::Finite(order))
    }

    pub(crate) fn inv_bounded(&self, order: Bound) -> Result<Series<C>, SeriesError> {
        let a = match self.leading() {
            Some((_, a)) => a.clone(),
            None => {
                return Err(match self.valuation() {
                    Valuation::ZeroUpToTruncation(e) => SeriesError::ZeroUpToTruncation(e),
                    _ => SeriesError::DivisionByZero,
                })
            }
        };
        let a_inv = a.inverse().map_err(coeff_err)?;
        self.binomial_power(-Exp::ONE, a_inv, order)
    }

    /// `self / g`, expanded up to `order`.
    pub fn div(&self, g: &Series<C>, order: Exp) -> Result<Series<C>, SeriesError> {
        self.div_bounded(g, Bound::Finite(order))
    }

    pub(crate) fn div_bounded(&self, g: &Series<C>, order: Bound) -> Result<Series<C>, SeriesError> {
        if self.is_exact_zero() {
            g.inv_bounded(order)?;
            return Ok(Series::zero());
        }
        let inv_order = match (order, self.valuation().lower_bound()) {
            (Bound::Finite(o), Bound::Finite(v)) => Bound::Finite(o - v),
            _ => order,
        };
        let q = self.mul_series(&g.inv_bounded(inv_order)?);
        Ok(q)
    }

    /// `self^e` for a rational exponent, expanded up to `order`.
    ///
    /// Requires a known leading term; for an even-denominator exponent the
    /// leading coefficient must be positive, and in exact mode it must have
    /// a rational root.
    pub fn pow(&self, e: Exp, order: Exp) -> Result<Series<C>, SeriesError> {
        self.pow_bounded(e, Bound::Finite(order))
    }

    pub(crate) fn pow_bounded(&self, e: Exp, order: Bound) -> Result<Series<C>, SeriesError> {
        match self.valuation() {
            Valuation::Zero => {
                return if e.is_positive() { Ok(Series::zero()) } else { Err(SeriesError::DivisionByZero) }
            }
            Valuation::ZeroUpToTruncation(t) => return Err(SeriesError::ZeroUpToTruncation(t)),
            Valuation::Order(_) => {}
        }
        if e.is_integer() && !e.is_negative() {
            return Ok(self.pow_nat(e.num() as u32, Bound::Infinite));
        }
        let a = self.leading().unwrap().1.clone();
        let lead_pow = a.rat_pow(e).map_err(coeff_err)?;
        let out = self.binomial_power(e, lead_pow, order)?;
        out.check_ram()?;
        Ok(out)
    }

    /// Substitutes `g` for the variable of `self`: `(self o g)(t) = self(g(t))`.
    ///
    /// `g` must have positive valuation. `order` cuts the expansion of
    /// fractional or negative powers of a non-monomial `g`.
    pub fn compose(&self, g: &Series<C>, order: Exp) -> Result<Series<C>, SeriesError> {
        self.compose_bounded(g, Bound::Finite(order))
    }

    pub(crate) fn compose_bounded(&self, g: &Series<C>, order: Bound) -> Result<Series<C>, SeriesError> {
        let w = match g.valuation() {
            Valuation::Order(w) if w.is_positive() => w,
            Valuation::Order(w) => return Err(SeriesError::NonPositiveValuationSubstitution(w)),
            Valuation::ZeroUpToTruncation(s) => return self.compose_unknown(s),
            Valuation::Zero => return self.compose_unknown_exact_zero(),
        };
        let s = g.trunc();
        let monomial = g.terms().len() == 1;
        let needs_order = !monomial && self.terms().iter().any(|(e, _)| !(e.is_integer() && !e.is_negative()));
        let mut bound = if needs_order { order } else { Bound::Infinite };
        if let Bound::Finite(t) = self.trunc() {
            bound = bound.min(Bound::Finite(t * w));
        }
        if let Bound::Finite(s) = s {
            for (e, _) in self.terms() {
                if *e != Exp::ZERO {
                    bound = bound.min(Bound::Finite(*e * w + s - w));
                }
            }
        }
        let mut acc = Series::<C>::zero().truncate(bound);
        let mut cached: Option<(i64, Series<C>)> = None;
        for (e, c) in self.terms() {
            if !bound.exceeds(*e * w) {
                break;
            }
            let power = if e.is_integer() && !e.is_negative() {
                let k = e.num();
                let next = match cached.take() {
                    Some((last, p)) => p.mul_trunc(&g.pow_nat((k - last) as u32, bound), bound),
                    None => g.pow_nat(k as u32, bound),
                };
                cached = Some((k, next.clone()));
                next
            } else {
                g.pow_bounded(*e, bound)?.truncate(bound)
            };
            acc = acc + power.scale(c);
        }
        let out = acc.truncate(bound);
        out.check_ram()?;
        Ok(out)
    }

    /// Substitution of an argument that is zero up to truncation at `s`.
    fn compose_unknown(&self, s: Exp) -> Result<Series<C>, SeriesError> {
        if !s.is_positive() {
            return Err(SeriesError::NonPositiveValuationSubstitution(s));
        }
        let mut bound = self.trunc().scale(s);
        let mut constant = C::zero();
        for (e, c) in self.terms() {
            match e.cmp(&Exp::ZERO) {
                Ordering::Less => return Err(SeriesError::NonPositiveValuationSubstitution(s)),
                Ordering::Equal => constant = c.clone(),
                Ordering::Greater => bound = bound.min(Bound::Finite(*e * s)),
            }
        }
        Ok(Series::constant(constant).truncate(bound))
    }

    fn compose_unknown_exact_zero(&self) -> Result<Series<C>, SeriesError> {
        if self.terms().iter().any(|(e, _)| e.is_negative()) {
            return Err(SeriesError::DivisionByZero);
        }
        match self.coeff(Exp::ZERO) {
            Some(c) => Ok(Series::constant(c)),
            None => Err(SeriesError::ZeroUpToTruncation(Exp::ZERO)),
        }
    }

    /// Order comparison in the real closed field: sign of the leading
    /// coefficient of `self - other`.
    pub fn cmp_germ(&self, other: &Series<C>) -> Result<Ordering, SeriesError> {
        match (self - other).valuation() {
            Valuation::Zero => Ok(Ordering::Equal),
            Valuation::ZeroUpToTruncation(e) => Err(SeriesError::IndistinguishableAtTruncation(e)),
            Valuation::Order(_) => Ok((self - other).leading().unwrap().1.sign()),
        }
    }

    /// Value of the germ at `0+`.
    pub fn limit0(&self) -> Limit<C> {
        match self.valuation() {
            Valuation::Order(e) if e.is_negative() => Limit::Diverges,
            Valuation::Order(_) | Valuation::Zero => Limit::Value(self.coeff(Exp::ZERO).unwrap_or_else(C::zero)),
            Valuation::ZeroUpToTruncation(e) if e.is_positive() => Limit::Value(C::zero()),
            Valuation::ZeroUpToTruncation(e) => Limit::Undetermined(e),
        }
    }

    /// Compositional inverse on germs at `0+`: returns `delta` with
    /// `self(delta(t)) = t`, expanded up to `order`.
    ///
    /// Requires `ord self = r > 0` and a positive leading coefficient; the
    /// result has order `1/r`.
    pub fn reparam_inverse(&self, order: Exp) -> Result<Series<C>, SeriesError> {
        let (r, a) = match self.valuation() {
            Valuation::Order(r) => (r, self.leading().unwrap().1.clone()),
            Valuation::ZeroUpToTruncation(e) => return Err(SeriesError::ZeroUpToTruncation(e)),
            Valuation::Zero => return Err(SeriesError::DivisionByZero),
        };
        if !r.is_positive() {
            return Err(SeriesError::NonPositiveValuationSubstitution(r));
        }
        if a.sign() != Ordering::Greater {
            return Err(SeriesError::NotPositive);
        }
        let root = Exp::ONE / r;
        // self = a t^r (1 + v), so delta = (t/a)^(1/r) (1 + v(delta))^(-1/r).
        let (_, _, v) = self.unit_split()?;
        let lead = Series::monomial(a.rat_pow(-root).map_err(coeff_err)?, root);
        let target = order - root;
        let delta = if v.is_exact_zero() {
            lead
        } else if !target.is_positive() {
            lead.truncate(Bound::Finite(order))
        } else {
            // A pass with delta known to relative order p fixes it to
            // p + ord(v)/r, so the working precision grows with it.
            let gain = v.valuation().lower_bound().finite().unwrap_or(r) * root;
            let mut delta = lead.clone();
            let mut prec = gain.min(target);
            let mut converged = false;
            let max_iter = (target / gain).ceil().max(0) as usize + 4;
            for _ in 0..max_iter {
                let p = (prec + gain).min(target);
                let cap = Bound::Finite(p);
                let vd = v.compose_bounded(&delta, cap)?;
                let next = (Series::one() + vd).pow_bounded(-root, cap)?.mul_trunc(&lead, cap.shift(root));
                converged = p == target && prec == target && next == delta;
                delta = next;
                prec = p;
                if converged {
                    break;
                }
            }
            if !converged {
                return Err(SeriesError::NoConvergence);
            }
            delta
        };
        delta.check_ram()?;
        Ok(delta)
    }
}
