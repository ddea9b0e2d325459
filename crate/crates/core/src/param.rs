//! Series in `t` whose coefficients are Laurent polynomials in a family
//! parameter `eps`, and the divergence analysis of such families as
//! `eps -> 0`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::puiseux::{Coeff, CoeffError, PuiseuxSeries, Series};
use crate::qarith::{Exp, Rat};

/// A Laurent polynomial in `eps` with rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LaurentEps {
    terms: BTreeMap<i32, Rat>,
}

impl LaurentEps {
    pub fn from_terms(terms: impl IntoIterator<Item = (i32, Rat)>) -> Self {
        let mut map: BTreeMap<i32, Rat> = BTreeMap::new();
        for (k, c) in terms {
            let slot = map.entry(k).or_insert_with(Rat::zero);
            *slot = &*slot + &c;
        }
        map.retain(|_, c| !c.is_zero());
        LaurentEps { terms: map }
    }

    pub fn monomial(c: Rat, k: i32) -> Self {
        LaurentEps::from_terms([(k, c)])
    }

    /// The parameter itself.
    pub fn eps() -> Self {
        LaurentEps::monomial(Rat::one(), 1)
    }

    pub fn terms(&self) -> &BTreeMap<i32, Rat> {
        &self.terms
    }

    pub fn coeff(&self, k: i32) -> Rat {
        self.terms.get(&k).cloned().unwrap_or_else(Rat::zero)
    }

    /// Lowest `eps` exponent, the dominant one as `eps -> 0`.
    pub fn min_exp(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn eval(&self, eps: &Rat) -> Rat {
        self.terms.iter().fold(Rat::zero(), |acc, (k, c)| acc + c * &eps.pow(*k).expect("nonzero parameter value"))
    }

    pub fn eval_f64(&self, eps: f64) -> f64 {
        self.terms.iter().map(|(k, c)| c.to_f64() * eps.powi(*k)).sum()
    }

    fn single(&self) -> Option<(i32, &Rat)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(k, c)| (*k, c))
        } else {
            None
        }
    }
}

fn render_eps_monomial(c: &Rat, k: i32) -> String {
    let power = match k {
        0 => String::new(),
        1 => "eps".to_string(),
        k if k > 0 => format!("eps^{k}"),
        k => format!("eps^({k})"),
    };
    if k == 0 {
        c.to_string()
    } else if *c == Rat::one() {
        power
    } else if *c == -Rat::one() {
        format!("-{power}")
    } else {
        format!("{c}*{power}")
    }
}

impl Coeff for LaurentEps {
    const EXACT: bool = true;

    fn zero() -> Self {
        LaurentEps::default()
    }
    fn one() -> Self {
        LaurentEps::monomial(Rat::one(), 0)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, other: &Self) -> Self {
        LaurentEps::from_terms(self.terms.iter().chain(&other.terms).map(|(k, c)| (*k, c.clone())))
    }
    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
    fn mul(&self, other: &Self) -> Self {
        LaurentEps::from_terms(
            self.terms.iter().flat_map(|(a, x)| other.terms.iter().map(move |(b, y)| (a + b, x * y))),
        )
    }
    fn neg(&self) -> Self {
        LaurentEps { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }
    fn from_rat(r: &Rat) -> Self {
        LaurentEps::monomial(r.clone(), 0)
    }
    fn scale(&self, r: &Rat) -> Self {
        LaurentEps::from_terms(self.terms.iter().map(|(k, c)| (*k, c * r)))
    }
    /// Only monomials are units.
    fn inverse(&self) -> Result<Self, CoeffError> {
        let (k, c) = self.single().ok_or(CoeffError::NotInvertible)?;
        let c = c.recip().map_err(|_| CoeffError::NotInvertible)?;
        Ok(LaurentEps::monomial(c, -k))
    }
    fn root(&self, n: u32) -> Result<Self, CoeffError> {
        let (k, c) = self.single().ok_or(CoeffError::IrrationalRoot)?;
        if k % n as i32 != 0 {
            return Err(CoeffError::IrrationalRoot);
        }
        let c = Coeff::root(c, n)?;
        Ok(LaurentEps::monomial(c, k / n as i32))
    }
    fn sign(&self) -> Ordering {
        self.terms.values().next().map_or(Ordering::Equal, Rat::signum)
    }
    fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (k, c)) in self.terms.iter().rev().enumerate() {
            let text = render_eps_monomial(c, *k);
            match (i, text.strip_prefix('-')) {
                (0, _) => out.push_str(&text),
                (_, Some(rest)) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                (_, None) => {
                    out.push_str(" + ");
                    out.push_str(&text);
                }
            }
        }
        out
    }
}

impl fmt::Debug for LaurentEps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Display for LaurentEps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// A series in `t` with coefficients in `Q[eps, 1/eps]`.
pub type ParamSeries = Series<LaurentEps>;

/// Lifts a rational series to a parameter series with constant
/// coefficients.
pub fn constant_family(s: &PuiseuxSeries) -> ParamSeries {
    s.map_coeffs(LaurentEps::from_rat)
}

/// Specialization at `eps = eps0`.
pub fn specialize(p: &ParamSeries, eps0: &Rat) -> PuiseuxSeries {
    assert!(!eps0.is_zero(), "cannot specialize at eps = 0");
    p.map_coeffs(|c| c.eval(eps0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmOp {
    Add,
    Mul,
}

pub fn pm_arith(op: PmOp, a: &ParamSeries, b: &ParamSeries) -> ParamSeries {
    match op {
        PmOp::Add => a + b,
        PmOp::Mul => a * b,
    }
}

/// `(t_exp, {eps_exp: coeff})` rows, as shown in reports.
pub fn rows(p: &ParamSeries) -> Vec<(Exp, BTreeMap<i32, Rat>)> {
    p.terms().iter().map(|(e, c)| (*e, c.terms().clone())).collect()
}

/// Coefficients `a_{m,n}` of a series written as
/// `sum a_{m,n} t^(m+n+1) eps^(m-n+1)`. Terms whose exponents do not fit
/// that shape with natural `m, n` are skipped.
pub fn expansion_coeffs(p: &ParamSeries) -> BTreeMap<(u32, u32), Rat> {
    let mut out = BTreeMap::new();
    for (e, c) in p.terms() {
        if !e.is_integer() {
            continue;
        }
        let k = e.num();
        for (j, a) in c.terms() {
            let j = *j as i64;
            let (two_m, two_n) = (k + j - 2, k - j);
            if two_m >= 0 && two_n >= 0 && two_m % 2 == 0 && two_n % 2 == 0 {
                out.insert(((two_m / 2) as u32, (two_n / 2) as u32), a.clone());
            }
        }
    }
    out
}

/// Among `(m, n)` with `n > m + 1` and nonzero coefficient: least `m + n`,
/// then greatest `n - m`.
pub fn select_m0n0(coeffs: &BTreeMap<(u32, u32), Rat>) -> Option<(u32, u32)> {
    coeffs
        .iter()
        .filter(|((m, n), a)| *n > m + 1 && !a.is_zero())
        .map(|(mn, _)| *mn)
        .min_by(|(m1, n1), (m2, n2)| (m1 + n1).cmp(&(m2 + n2)).then((n2 - m2).cmp(&(n1 - m1))))
}

/// A coefficient at a finite `t`-order that is unbounded as `eps -> 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivergenceWitness {
    pub t_exp: Exp,
    pub eps_exp: i32,
    pub coeff: Rat,
    pub m0n0: Option<(u32, u32)>,
}

impl fmt::Display for DivergenceWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t^({}) eps^({}) coefficient {}", self.t_exp, self.eps_exp, self.coeff)?;
        if let Some((m, n)) = self.m0n0 {
            write!(f, ", (m0, n0) = ({m}, {n})")?;
        }
        Ok(())
    }
}

/// The lowest `t`-order term carrying a negative power of `eps`; at that
/// order the most negative power is reported.
pub fn divergence_witness(p: &ParamSeries) -> Option<DivergenceWitness> {
    let (e, c) = p.terms().iter().find(|(_, c)| c.min_exp().is_some_and(|k| k < 0))?;
    let k = c.min_exp().unwrap();
    Some(DivergenceWitness { t_exp: *e, eps_exp: k, coeff: c.coeff(k), m0n0: select_m0n0(&expansion_coeffs(p)) })
}

/// Coefficientwise limit as `eps -> 0`, if every known coefficient stays
/// bounded.
pub fn limit_eps0(p: &ParamSeries) -> Option<PuiseuxSeries> {
    if divergence_witness(p).is_some() {
        return None;
    }
    Some(Series::from_terms(p.terms().iter().map(|(e, c)| (*e, c.coeff(0))), p.trunc()))
}
