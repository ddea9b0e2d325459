//! Preimage arcs: given `h` and an arc `gamma`, an arc `delta` with
//! `h o delta = gamma` up to a target order.
//!
//! Supported systems are triangular: some equation involves exactly one
//! unknown and is polynomial in it, and solving unknowns in turn keeps this
//! true. Each such equation is solved with the Newton polygon; real branches
//! are tried in ascending order, backtracking when a later equation fails.

use std::collections::BTreeSet;

use super::eval::series_err;
use super::{eval_map_on_arc, eval_series, Expr, MapExpr, TransportError};
use crate::newton::{np_roots, PolyOverSeries};
use crate::puiseux::{Arc, PuiseuxSeries, Series, Valuation};
use crate::qarith::{Bound, Exp};

/// Largest natural power of the unknown expanded symbolically.
const MAX_POWER: i64 = 64;

pub fn solve_preimage_arc(h: &MapExpr, gamma: &Arc, target: Exp) -> Result<Arc, TransportError> {
    if gamma.dim() != h.output_dim() {
        return Err(TransportError::DimensionMismatch { expected: h.output_dim(), found: gamma.dim() });
    }
    let vars: Vec<BTreeSet<usize>> = h
        .outputs
        .iter()
        .map(|e| {
            let mut s = BTreeSet::new();
            collect_vars(e, &mut s);
            s
        })
        .collect();
    // Unknowns solved early feed later equations, which may need them to
    // higher order than the target; the inner order grows until the final
    // residuals are decided.
    let mut inner = target;
    for _ in 0..MAX_ROUNDS {
        let mut ctx =
            Search { h, gamma, target, inner, vars: vars.clone(), known: vec![None; h.input_dim()], imprecise: false };
        if let Some(arc) = ctx.search()? {
            return Ok(arc);
        }
        if !ctx.imprecise {
            return Err(TransportError::NoRealBranch);
        }
        inner = inner * 2 + Exp::int(2);
    }
    Err(TransportError::Newton(crate::newton::NewtonError::TruncationExhausted(inner)))
}

const MAX_ROUNDS: usize = 4;

fn collect_vars(e: &Expr, out: &mut BTreeSet<usize>) {
    match e {
        Expr::Var(i) => {
            out.insert(*i);
        }
        Expr::Const(_) => {}
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        Expr::Neg(a) | Expr::Pow(a, _) => collect_vars(a, out),
    }
}

struct Search<'a> {
    h: &'a MapExpr,
    gamma: &'a Arc,
    target: Exp,
    inner: Exp,
    vars: Vec<BTreeSet<usize>>,
    known: Vec<Option<PuiseuxSeries>>,
    imprecise: bool,
}

impl Search<'_> {
    fn search(&mut self) -> Result<Option<Arc>, TransportError> {
        let unsolved: BTreeSet<usize> = (0..self.known.len()).filter(|i| self.known[*i].is_none()).collect();
        if unsolved.is_empty() {
            return self.verify();
        }
        let pick = self.vars.iter().enumerate().find_map(|(i, vs)| {
            let mut open = vs.intersection(&unsolved);
            match (open.next(), open.next()) {
                (Some(k), None) => Some((i, *k)),
                _ => None,
            }
        });
        let Some((eq, k)) = pick else {
            return Err(TransportError::UnsupportedShape("no equation has a single unknown".into()));
        };
        let mut coeffs = self.expand(&self.h.outputs[eq], k)?;
        coeffs[0] = &coeffs[0] - self.gamma.component(eq);
        let poly = PolyOverSeries::new(coeffs)?;
        if poly.degree() == 0 {
            return Err(TransportError::UnsupportedShape(format!("equation {eq} does not determine its unknown")));
        }
        for branch in np_roots(&poly, self.inner)? {
            self.known[k] = Some(branch.series);
            match self.search() {
                Ok(Some(arc)) => return Ok(Some(arc)),
                Ok(None) | Err(TransportError::GuardViolation(_) | TransportError::ZeroDivision) => {}
                Err(e) => return Err(e),
            }
        }
        self.known[k] = None;
        Ok(None)
    }

    fn verify(&mut self) -> Result<Option<Arc>, TransportError> {
        let delta = Arc::new(self.known.iter().map(|s| s.clone().expect("solved")).collect());
        let image = eval_map_on_arc(self.h, &delta, self.coeff_order())?;
        let target = Bound::Finite(self.target);
        let residuals: Vec<_> =
            image.components().iter().zip(self.gamma.components()).map(|(a, b)| (a - b).valuation()).collect();
        if residuals.iter().all(|v| v.lower_bound() >= target) {
            return Ok(Some(delta));
        }
        if !residuals.iter().any(|v| matches!(v, Valuation::Order(e) if Bound::Finite(*e) < target)) {
            self.imprecise = true;
        }
        Ok(None)
    }

    /// Order at which infinite expansions of coefficients are cut, with
    /// room for the cancellation of low-order terms.
    fn coeff_order(&self) -> Exp {
        self.inner * 2 + Exp::int(2)
    }

    /// `e` as a polynomial in the unknown `k` with series coefficients.
    fn expand(&self, e: &Expr, k: usize) -> Result<Vec<PuiseuxSeries>, TransportError> {
        let mut vs = BTreeSet::new();
        collect_vars(e, &mut vs);
        if !vs.contains(&k) {
            let args: Vec<PuiseuxSeries> = self.known.iter().map(|s| s.clone().unwrap_or_else(Series::zero)).collect();
            return Ok(vec![eval_series(e, &args, self.coeff_order())?]);
        }
        Ok(match e {
            Expr::Var(_) => vec![Series::zero(), Series::one()],
            Expr::Const(_) => unreachable!("constants contain no unknown"),
            Expr::Add(a, b) => poly_add(&self.expand(a, k)?, &self.expand(b, k)?, false),
            Expr::Sub(a, b) => poly_add(&self.expand(a, k)?, &self.expand(b, k)?, true),
            Expr::Neg(a) => self.expand(a, k)?.iter().map(|c| -c).collect(),
            Expr::Mul(a, b) => poly_mul(&self.expand(a, k)?, &self.expand(b, k)?),
            Expr::Div(a, b) => {
                let d = self.expand(b, k)?;
                if d.len() != 1 {
                    return Err(TransportError::UnsupportedShape("division by an unknown".into()));
                }
                let order = self.coeff_order();
                let n = self.expand(a, k)?;
                let out: Result<Vec<_>, _> = n.iter().map(|c| c.div(&d[0], order).map_err(series_err)).collect();
                out?
            }
            Expr::Pow(a, p) => {
                if !p.is_integer() || p.is_negative() || p.num() > MAX_POWER {
                    return Err(TransportError::UnsupportedShape(format!("power {p} of an unknown")));
                }
                let base = self.expand(a, k)?;
                let mut acc = vec![Series::one()];
                for _ in 0..p.num() {
                    acc = poly_mul(&acc, &base);
                }
                acc
            }
        })
    }
}

fn poly_add(a: &[PuiseuxSeries], b: &[PuiseuxSeries], negate: bool) -> Vec<PuiseuxSeries> {
    let zero = Series::zero();
    (0..a.len().max(b.len()))
        .map(|i| {
            let x = a.get(i).unwrap_or(&zero);
            let y = b.get(i).unwrap_or(&zero);
            if negate {
                x - y
            } else {
                x + y
            }
        })
        .collect()
}

fn poly_mul(a: &[PuiseuxSeries], b: &[PuiseuxSeries]) -> Vec<PuiseuxSeries> {
    let mut out = vec![Series::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &x.mul_series(y);
        }
    }
    out
}
