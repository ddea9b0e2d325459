//! The point blow-up of the plane at the origin and its two charts.

use serde::Serialize;

use super::{Expr, MapExpr, TransportError};
use crate::puiseux::{Arc, Coeff, Series, Valuation};
use crate::qarith::{Bound, Exp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BlowupChart {
    /// `(u, v) -> (u, u v)`
    U,
    /// `(u, v) -> (u v, v)`
    V,
}

impl BlowupChart {
    /// The chart map to the plane.
    pub fn projection(self) -> MapExpr {
        let uv = Expr::mul(Expr::Var(0), Expr::Var(1));
        let outputs = match self {
            BlowupChart::U => vec![Expr::Var(0), uv],
            BlowupChart::V => vec![uv, Expr::Var(1)],
        };
        MapExpr::new(vec!["u".into(), "v".into()], outputs)
    }

    /// Pushes a chart arc down to the plane.
    pub fn push<C: Coeff>(self, a: &Arc<C>) -> Arc<C> {
        assert_eq!(a.dim(), 2);
        let (u, v) = (a.component(0), a.component(1));
        match self {
            BlowupChart::U => Arc::new(vec![u.clone(), u * v]),
            BlowupChart::V => Arc::new(vec![u * v, v.clone()]),
        }
    }
}

/// Orders of the two coordinates, `None` standing for an exact zero.
fn order_pair<C: Coeff>(c: &Arc<C>) -> Result<(Option<Exp>, Option<Exp>), TransportError> {
    let v = |s: &Series<C>| s.valuation();
    match (v(c.component(0)), v(c.component(1))) {
        (Valuation::Zero, Valuation::Zero) => Err(TransportError::ZeroArc),
        (Valuation::Order(a), Valuation::Order(b)) => Ok((Some(a), Some(b))),
        (Valuation::Order(a), Valuation::Zero) => Ok((Some(a), None)),
        (Valuation::Zero, Valuation::Order(b)) => Ok((None, Some(b))),
        // Only a strict inequality against the unknown part can be decided.
        (Valuation::ZeroUpToTruncation(s), Valuation::Order(b)) if b < s => Ok((None, Some(b))),
        (Valuation::Order(a), Valuation::ZeroUpToTruncation(s)) if a <= s => Ok((Some(a), None)),
        (Valuation::ZeroUpToTruncation(s), _) | (_, Valuation::ZeroUpToTruncation(s)) => {
            Err(TransportError::Series(crate::puiseux::SeriesError::IndistinguishableAtTruncation(s)))
        }
    }
}

/// Lifts an arc at the origin of the plane to the blow-up.
///
/// Chart `U` is used when `ord c1 <= ord c2`, chart `V` otherwise. `order`
/// cuts the quotient when the divisor is not a monomial.
pub fn lift_arc_blowup<C: Coeff>(c: &Arc<C>, order: Exp) -> Result<(BlowupChart, Arc<C>), TransportError> {
    if c.dim() != 2 {
        return Err(TransportError::DimensionMismatch { expected: 2, found: c.dim() });
    }
    if !c.is_based_at_origin() {
        return Err(TransportError::NotAtOrigin);
    }
    let (a, b) = order_pair(c)?;
    let chart = match (a, b) {
        (Some(a), Some(b)) if a <= b => BlowupChart::U,
        (Some(_), None) => BlowupChart::U,
        _ => BlowupChart::V,
    };
    let (x, y) = (c.component(0), c.component(1));
    let bound = Bound::Finite(order);
    let lifted = match chart {
        BlowupChart::U => vec![x.clone(), quotient(y, x, bound)?],
        BlowupChart::V => vec![quotient(x, y, bound)?, y.clone()],
    };
    Ok((chart, Arc::new(lifted)))
}

fn quotient<C: Coeff>(n: &Series<C>, d: &Series<C>, bound: Bound) -> Result<Series<C>, TransportError> {
    if n.is_exact_zero() {
        return Ok(Series::zero());
    }
    n.div_bounded(d, bound).map_err(TransportError::Series)
}
