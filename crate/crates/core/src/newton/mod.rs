//! Roots of polynomials whose coefficients are truncated Puiseux series,
//! found with the Newton polygon and lifted to a requested residual order.
//!
//! Simple roots of an edge equation are lifted by Newton iteration on the
//! original polynomial. Multiple roots shift the polynomial and recurse on
//! the part of the new polygon with steeper edges.

mod realroots;

pub use realroots::RootField;

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::puiseux::{Coeff, Series, SeriesError, Valuation};
use crate::qarith::{Bound, Exp, Rat};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NewtonError {
    #[error("an edge equation has irrational real roots")]
    IrrationalBranch,
    #[error("coefficients are known only below t^{0}, too low to separate the roots")]
    TruncationExhausted(Exp),
    #[error("no real root branch")]
    NoRealBranch,
    #[error("an edge equation has coefficients too large for the rational root search")]
    CoefficientTooLarge,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial has even degree {0}")]
    EvenDegree(usize),
    #[error("Newton lifting did not converge")]
    NoConvergence,
    #[error("numeric residual {value:e} at t = {t} exceeds {tolerance:e}")]
    NumericResidual { value: f64, t: f64, tolerance: f64 },
    #[error("germ is not positive")]
    NotPositive,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `sum_j f_j(t) X^j` with series coefficients `f_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyOverSeries<C: Coeff = Rat> {
    coeffs: Vec<Series<C>>,
}

impl<C: Coeff> PolyOverSeries<C> {
    /// Drops exactly zero leading coefficients. The remaining leading
    /// coefficient must have a known nonzero term.
    pub fn new(mut coeffs: Vec<Series<C>>) -> Result<Self, NewtonError> {
        while coeffs.last().is_some_and(Series::is_exact_zero) {
            coeffs.pop();
        }
        match coeffs.last().map(Series::valuation) {
            None => Err(NewtonError::ZeroPolynomial),
            Some(Valuation::ZeroUpToTruncation(e)) => Err(NewtonError::TruncationExhausted(e)),
            _ => Ok(PolyOverSeries { coeffs }),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Series<C>] {
        &self.coeffs
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.iter().all(Series::is_exact)
    }

    /// `P(t, x(t))` by Horner's rule.
    pub fn eval(&self, x: &Series<C>) -> Series<C> {
        horner(&self.coeffs, x)
    }

    pub fn derivative(&self) -> Result<Self, NewtonError> {
        let coeffs =
            self.coeffs.iter().enumerate().skip(1).map(|(j, c)| c.scale(&C::from_rat(&Rat::int(j as i64)))).collect();
        Self::new(coeffs)
    }

    /// `Q(X) = P(s + X)`.
    pub fn taylor_shift(&self, s: &Series<C>) -> Self {
        PolyOverSeries { coeffs: shift_coeffs(&self.coeffs, s) }
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D + Copy) -> PolyOverSeries<D> {
        PolyOverSeries { coeffs: self.coeffs.iter().map(|c| c.map_coeffs(f)).collect() }
    }
}

fn horner<C: Coeff>(coeffs: &[Series<C>], x: &Series<C>) -> Series<C> {
    let mut acc = coeffs.last().cloned().unwrap_or_else(Series::zero);
    for c in coeffs.iter().rev().skip(1) {
        acc = &acc.mul_series(x) + c;
    }
    acc
}

fn shift_coeffs<C: Coeff>(q: &[Series<C>], s: &Series<C>) -> Vec<Series<C>> {
    let n = q.len();
    let mut pows = vec![Series::one()];
    for i in 1..n {
        pows.push(pows[i - 1].mul_series(s));
    }
    (0..n)
        .map(|k| {
            let mut acc = Series::zero();
            let mut binom = Rat::one();
            for j in k..n {
                if j > k {
                    binom = &(&binom * &Rat::int(j as i64)) / &Rat::int((j - k) as i64);
                }
                let term = q[j].mul_series(&pows[j - k]).scale(&C::from_rat(&binom));
                acc = &acc + &term;
            }
            acc
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Exactness {
    Exact,
    Numeric,
}

/// A real root branch: `P(t, series)` has order at least `certified_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootBranch<C: Coeff = Rat> {
    pub series: Series<C>,
    pub multiplicity: u32,
    pub certified_order: Bound,
    pub exactness: Exactness,
}

/// Branches in exact mode, or in numeric mode after an exact attempt
/// needed irrational numbers.
#[derive(Debug, Clone, PartialEq)]
pub enum RootSet {
    Exact(Vec<RootBranch<Rat>>),
    Numeric(Vec<RootBranch<f64>>),
}

/// Numeric coefficients below this magnitude are treated as zero.
pub const NUMERIC_PRUNE: f64 = 1e-9;
/// Point at which numeric branches are checked.
pub const NUMERIC_CHECK_T: f64 = 1e-3;
/// Tolerance for `|P(t, x(t))|` at [`NUMERIC_CHECK_T`].
pub const NUMERIC_RESIDUAL_TOL: f64 = 1e-9;

const MAX_NEWTON_STEPS: usize = 64;

/// All real root branches of `p`, each with residual order at least
/// `target`, in ascending germ order.
pub fn np_roots<C: RootField>(p: &PolyOverSeries<C>, target: Exp) -> Result<Vec<RootBranch<C>>, NewtonError> {
    if p.degree() == 0 {
        return Ok(Vec::new());
    }
    let mut solver = Solver { p, dp: p.derivative()?, target, out: Vec::new() };
    solver.solve(p.coeffs.clone(), Series::zero(), None, p.degree())?;
    let mut out = solver.out;
    out.sort_by(|a, b| germ_order(&a.series, &b.series));
    if !C::EXACT {
        for b in &out {
            numeric_check(p, b, target)?;
        }
    }
    Ok(out)
}

/// Exact mode first; on irrational edge roots the whole computation is
/// redone with floating-point coefficients.
pub fn np_roots_auto(p: &PolyOverSeries<Rat>, target: Exp) -> Result<RootSet, NewtonError> {
    match np_roots(p, target) {
        Ok(b) => Ok(RootSet::Exact(b)),
        Err(
            NewtonError::IrrationalBranch
            | NewtonError::CoefficientTooLarge
            | NewtonError::Series(SeriesError::IrrationalLeadingRoot),
        ) => np_roots(&p.map_coeffs(Rat::to_f64), target).map(RootSet::Numeric),
        Err(e) => Err(e),
    }
}

/// A real root of an odd-degree polynomial: the first branch of odd
/// multiplicity, which exists since the real roots of odd total
/// multiplicity cannot all pair up.
pub fn rc_witness_odd<C: RootField>(p: &PolyOverSeries<C>, target: Exp) -> Result<RootBranch<C>, NewtonError> {
    if p.degree().is_multiple_of(2) {
        return Err(NewtonError::EvenDegree(p.degree()));
    }
    np_roots(p, target)?.into_iter().find(|b| b.multiplicity % 2 == 1).ok_or(NewtonError::NoRealBranch)
}

/// Positive square root of a positive germ, with `result^2 - f` of order
/// at least `target`.
pub fn sqrt_positive<C: Coeff>(f: &Series<C>, target: Exp) -> Result<Series<C>, NewtonError> {
    let v = match f.valuation() {
        Valuation::Order(v) => v,
        Valuation::ZeroUpToTruncation(e) => return Err(NewtonError::TruncationExhausted(e)),
        Valuation::Zero => return Err(NewtonError::NotPositive),
    };
    if f.leading().unwrap().1.sign() != Ordering::Greater {
        return Err(NewtonError::NotPositive);
    }
    let half = Exp::new(1, 2);
    Ok(f.pow(half, target - v * half)?)
}

/// Ascending order of branches, comparing known terms only.
fn germ_order<C: Coeff>(a: &Series<C>, b: &Series<C>) -> Ordering {
    match (a - b).leading() {
        Some((_, c)) => c.sign(),
        None => Ordering::Equal,
    }
}

fn prune<C: Coeff>(s: Series<C>) -> Series<C> {
    if C::EXACT {
        return s;
    }
    let terms: Vec<_> = s.terms().iter().filter(|(_, c)| c.magnitude() > NUMERIC_PRUNE).cloned().collect();
    Series::from_terms(terms, s.trunc())
}

/// Terms below `w`, as an exact element.
fn strip<C: Coeff>(s: &Series<C>, w: Exp) -> Series<C> {
    Series::from_terms(s.terms().iter().filter(|(e, _)| *e < w).cloned(), Bound::Infinite)
}

fn numeric_check<C: RootField>(p: &PolyOverSeries<C>, b: &RootBranch<C>, target: Exp) -> Result<(), NewtonError> {
    let t = NUMERIC_CHECK_T;
    let x = b.series.eval_f64(t, C::approx);
    let value: f64 = p.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.eval_f64(t, C::approx));
    let scale: f64 = 1.0 + p.coeffs.iter().flat_map(|c| c.terms().iter().map(|(_, a)| a.approx().abs())).sum::<f64>();
    // The series are cut at the target order, so the value carries an
    // error of that order in t.
    let tolerance = NUMERIC_RESIDUAL_TOL.max(scale * t.powf(target.to_f64()));
    if value.abs() <= tolerance {
        Ok(())
    } else {
        Err(NewtonError::NumericResidual { value, t, tolerance })
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Point {
    Known(Exp),
    Phantom(Exp),
    Absent,
}

fn point<C: Coeff>(s: &Series<C>) -> Point {
    match s.valuation() {
        Valuation::Order(v) => Point::Known(v),
        Valuation::ZeroUpToTruncation(e) => Point::Phantom(e),
        Valuation::Zero => Point::Absent,
    }
}

fn cross(o: (usize, Exp), a: (usize, Exp), b: (usize, Exp)) -> Exp {
    let dx1 = Exp::int(a.0 as i64 - o.0 as i64);
    let dx2 = Exp::int(b.0 as i64 - o.0 as i64);
    dx1 * (b.1 - o.1) - (a.1 - o.1) * dx2
}

/// Lower convex hull of points sorted by abscissa.
fn lower_hull(pts: &[(usize, Exp)]) -> Vec<(usize, Exp)> {
    let mut hull: Vec<(usize, Exp)> = Vec::new();
    for &p in pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= Exp::ZERO {
            hull.pop();
        }
        hull.push(p);
    }
    hull
}

fn hull_height(hull: &[(usize, Exp)], j: usize) -> Exp {
    let w = hull.windows(2).find(|w| w[0].0 <= j && j <= w[1].0).expect("inside the hull");
    let (a, va) = w[0];
    let (b, vb) = w[1];
    va + (vb - va) * Exp::new((j - a) as i64, (b - a) as i64)
}

struct Solver<'a, C: RootField> {
    p: &'a PolyOverSeries<C>,
    dp: PolyOverSeries<C>,
    target: Exp,
    out: Vec<RootBranch<C>>,
}

impl<C: RootField> Solver<'_, C> {
    fn emit(&mut self, series: Series<C>, multiplicity: usize, certified_order: Bound) {
        let exactness = if C::EXACT { Exactness::Exact } else { Exactness::Numeric };
        self.out.push(RootBranch { series, multiplicity: multiplicity as u32, certified_order, exactness });
    }

    /// Roots `prefix + X` of `P`, where `X` runs over the roots of
    /// `q(X) = P(prefix + X)` of order above `gamma_min` (all roots when
    /// `None`). Exactly `limit` such roots exist, counted with multiplicity,
    /// and `q[limit]` has a known order.
    fn solve(
        &mut self,
        q: Vec<Series<C>>,
        prefix: Series<C>,
        gamma_min: Option<Exp>,
        limit: usize,
    ) -> Result<(), NewtonError> {
        let q: Vec<Series<C>> = q.into_iter().map(prune).collect();
        let k0 = q[..limit].iter().take_while(|c| c.is_exact_zero()).count();
        if k0 > 0 {
            self.emit(prefix.clone(), k0, Bound::Infinite);
        }
        let q = &q[k0..];
        let limit = limit - k0;
        if limit == 0 {
            return Ok(());
        }
        let pts: Vec<Point> = q.iter().map(point).collect();
        let v_limit = match pts[limit] {
            Point::Known(v) => v,
            Point::Phantom(e) => return Err(NewtonError::TruncationExhausted(e)),
            Point::Absent => unreachable!("pivot coefficient is nonzero"),
        };
        if let (Some(_), Point::Known(v0)) = (gamma_min, pts[0]) {
            if v0 >= self.target {
                // The smallest root order in the cluster: the slope of the
                // last polygon edge, bounded using phantom points as known.
                let w = pts[..limit]
                    .iter()
                    .enumerate()
                    .filter_map(|(j, pt)| match pt {
                        Point::Known(v) | Point::Phantom(v) => Some((*v - v_limit) / Exp::int((limit - j) as i64)),
                        Point::Absent => None,
                    })
                    .min()
                    .expect("the constant coefficient is present");
                self.emit(prefix.truncate(Bound::Finite(w)), limit, Bound::Finite(v0));
                return Ok(());
            }
        }
        let mut hull_pts = Vec::new();
        for (j, pt) in pts[..=limit].iter().enumerate() {
            match pt {
                Point::Known(v) => hull_pts.push((j, *v)),
                Point::Phantom(e) if j == 0 => hull_pts.push((0, *e)),
                _ => {}
            }
        }
        let hull = lower_hull(&hull_pts);
        for (j, pt) in pts.iter().enumerate().skip(1) {
            let Point::Phantom(e) = *pt else { continue };
            let blocked = if j <= limit {
                e <= hull_height(&hull, j)
            } else {
                gamma_min.is_some_and(|g| e < v_limit - g * Exp::int((j - limit) as i64))
            };
            if blocked {
                return Err(NewtonError::TruncationExhausted(e));
            }
        }
        for w in hull.windows(2) {
            let (a, va) = w[0];
            let (b, vb) = w[1];
            let gamma = (va - vb) / Exp::int((b - a) as i64);
            if gamma_min.is_some_and(|g| gamma <= g) {
                continue;
            }
            if let (0, Point::Phantom(r)) = (a, pts[0]) {
                // Roots of this cluster are fixed only up to O(t^gamma).
                if r < self.target {
                    return Err(NewtonError::TruncationExhausted(r));
                }
                self.emit(prefix.truncate(Bound::Finite(gamma)), b, Bound::Finite(r));
                continue;
            }
            let beta = va + gamma * Exp::int(a as i64);
            let edge: Vec<C> = (a..=b)
                .map(|j| match pts[j] {
                    Point::Known(v) if v + gamma * Exp::int(j as i64) == beta => q[j].leading().unwrap().1.clone(),
                    _ => C::zero(),
                })
                .collect();
            for (c, m) in C::real_roots(&edge)? {
                let term = Series::monomial(c, gamma);
                let next = &prefix + &term;
                next.check_ram()?;
                if m == 1 {
                    self.lift(next)?;
                } else {
                    self.solve(shift_coeffs(q, &term), next, Some(gamma), m as usize)?;
                }
            }
        }
        Ok(())
    }

    /// Newton iteration from the leading part of a simple root.
    fn lift(&mut self, x0: Series<C>) -> Result<(), NewtonError> {
        let dv = match prune(self.dp.eval(&x0)).valuation() {
            Valuation::Order(v) => v,
            other => return Err(exhausted(other)),
        };
        // Accuracy needed in x for the residual to reach the target.
        let w = self.target - dv;
        let mut x = x0;
        for _ in 0..MAX_NEWTON_STEPS {
            let r = prune(self.p.eval(&x));
            let lb = r.valuation().lower_bound();
            if lb >= Bound::Finite(self.target) {
                // Near a simple root, ord(x - root) = ord P(x) - ord P'(x).
                let series = match lb {
                    Bound::Infinite => x,
                    Bound::Finite(v) => x.truncate(Bound::Finite(v - dv)),
                };
                self.emit(series, 1, lb);
                return Ok(());
            }
            if r.terms().is_empty() {
                return Err(exhausted(r.valuation()));
            }
            let d = prune(self.dp.eval(&x));
            let delta = r.div(&d, w)?;
            let next = strip(&(&x - &delta), w);
            if next == x {
                return Err(NewtonError::NoConvergence);
            }
            next.check_ram()?;
            x = next;
        }
        Err(NewtonError::NoConvergence)
    }
}

fn exhausted(v: Valuation) -> NewtonError {
    match v {
        Valuation::ZeroUpToTruncation(e) => NewtonError::TruncationExhausted(e),
        _ => NewtonError::NoConvergence,
    }
}
