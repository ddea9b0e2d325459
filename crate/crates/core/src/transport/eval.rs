//! Evaluation of map expressions at real points and along arcs.

use std::cmp::Ordering;

use super::{Expr, MapExpr, TransportError};
use crate::puiseux::{Arc, Coeff, Series, SeriesError, Valuation};
use crate::qarith::{Bound, Exp};

/// Value of `e` at a real point.
pub fn eval_point(e: &Expr, x: &[f64]) -> Result<f64, TransportError> {
    Ok(match e {
        Expr::Var(i) => x[*i],
        Expr::Const(c) => c.to_f64(),
        Expr::Add(a, b) => eval_point(a, x)? + eval_point(b, x)?,
        Expr::Sub(a, b) => eval_point(a, x)? - eval_point(b, x)?,
        Expr::Mul(a, b) => eval_point(a, x)? * eval_point(b, x)?,
        Expr::Div(a, b) => {
            let d = eval_point(b, x)?;
            if d == 0.0 {
                return Err(TransportError::ZeroDivision);
            }
            eval_point(a, x)? / d
        }
        Expr::Neg(a) => -eval_point(a, x)?,
        Expr::Pow(a, k) => real_pow(eval_point(a, x)?, *k)?,
    })
}

/// Real power with the conventions of the expression language: odd roots
/// of negatives are negative, even roots of negatives are rejected.
pub fn real_pow(base: f64, k: Exp) -> Result<f64, TransportError> {
    if k.is_integer() {
        if base == 0.0 && k.is_negative() {
            return Err(TransportError::ZeroDivision);
        }
        return Ok(base.powi(k.num() as i32));
    }
    if base < 0.0 {
        if k.den() % 2 == 0 {
            return Err(TransportError::GuardViolation(format!("power {k} of a negative value")));
        }
        let mag = (-base).powf(k.to_f64());
        return Ok(if k.num() % 2 == 0 { mag } else { -mag });
    }
    if base == 0.0 && k.is_negative() {
        return Err(TransportError::ZeroDivision);
    }
    Ok(base.powf(k.to_f64()))
}

pub fn eval_map_point(h: &MapExpr, x: &[f64]) -> Result<Vec<f64>, TransportError> {
    check_dim(h, x.len())?;
    h.outputs.iter().map(|e| eval_point(e, x)).collect()
}

fn check_dim(h: &MapExpr, n: usize) -> Result<(), TransportError> {
    if h.input_dim() != n {
        return Err(TransportError::DimensionMismatch { expected: h.input_dim(), found: n });
    }
    Ok(())
}

pub(crate) fn series_err(e: SeriesError) -> TransportError {
    match e {
        SeriesError::NegativeBaseForEvenRoot => {
            TransportError::GuardViolation("even root of a germ that is negative near 0+".into())
        }
        SeriesError::DivisionByZero | SeriesError::ZeroUpToTruncation(_) => TransportError::ZeroDivision,
        other => TransportError::Series(other),
    }
}

/// Value of `e` along the arc whose coordinates are `args`.
///
/// `order` cuts infinite expansions (inverses, fractional powers) at an
/// absolute `t`-order. A product whose left factor is exactly zero is zero
/// without evaluating the right factor, so formulas valid off an axis also
/// evaluate on it.
pub fn eval_series<C: Coeff>(e: &Expr, args: &[Series<C>], order: Exp) -> Result<Series<C>, TransportError> {
    let bound = Bound::Finite(order);
    Ok(match e {
        Expr::Var(i) => args[*i].clone(),
        Expr::Const(c) => Series::constant(C::from_rat(c)),
        Expr::Add(a, b) => eval_series(a, args, order)? + eval_series(b, args, order)?,
        Expr::Sub(a, b) => eval_series(a, args, order)? - eval_series(b, args, order)?,
        Expr::Mul(a, b) => {
            let l = eval_series(a, args, order)?;
            if l.is_exact_zero() {
                return Ok(l);
            }
            l * eval_series(b, args, order)?
        }
        Expr::Div(a, b) => {
            let d = eval_series(b, args, order)?;
            match d.valuation() {
                Valuation::Zero | Valuation::ZeroUpToTruncation(_) => return Err(TransportError::ZeroDivision),
                Valuation::Order(_) => {}
            }
            let n = eval_series(a, args, order)?;
            n.div_bounded(&d, bound).map_err(series_err)?
        }
        Expr::Neg(a) => -eval_series(a, args, order)?,
        Expr::Pow(a, k) => {
            let base = eval_series(a, args, order)?;
            if k.den() % 2 == 0 {
                if let Some((_, c)) = base.leading() {
                    if c.sign() == Ordering::Less {
                        return Err(TransportError::GuardViolation(format!(
                            "power {k} of a germ that is negative near 0+"
                        )));
                    }
                }
            }
            base.pow_bounded(*k, bound).map_err(series_err)?
        }
    })
}

/// Pushforward `h o c` of an arc.
pub fn eval_map_on_arc<C: Coeff>(h: &MapExpr, c: &Arc<C>, order: Exp) -> Result<Arc<C>, TransportError> {
    check_dim(h, c.dim())?;
    let out: Result<Vec<_>, _> = h.outputs.iter().map(|e| eval_series(e, c.components(), order)).collect();
    Ok(Arc::new(out?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_map, parse_series};
    use crate::puiseux::PuiseuxSeries;

    fn arc(parts: &[&str]) -> Arc {
        Arc::new(parts.iter().map(|s| parse_series(s).unwrap()).collect())
    }

    #[test]
    fn identity_and_whitney() {
        let id = parse_map("(x, y)").unwrap();
        let c = arc(&["t + 2*t^3", "t^(1/2)"]);
        assert_eq!(eval_map_on_arc(&id, &c, Exp::int(8)).unwrap(), c);
        let w = parse_map("(u, u*v, v^2)").unwrap();
        let img = eval_map_on_arc(&w, &arc(&["t", "t"]), Exp::int(8)).unwrap();
        assert_eq!(img, arc(&["t", "t^2", "t^2"]));
        // On x^2 z = y^2.
        let lhs = img.component(0) * img.component(0) * img.component(2).clone();
        assert_eq!(lhs, img.component(1) * img.component(1));
    }

    #[test]
    fn phi_fixes_the_y_axis() {
        let phi = parse_map("(x*(1 + y^2/(x^2+y^2))^(1/4), y)").unwrap();
        let c = Arc::new(vec![PuiseuxSeries::zero(), PuiseuxSeries::t()]);
        assert_eq!(eval_map_on_arc(&phi, &c, Exp::int(8)).unwrap(), c);
    }

    #[test]
    fn guards() {
        let m = parse_map("x^(1/2)").unwrap();
        let c = arc(&["-t"]);
        assert!(matches!(eval_map_on_arc(&m, &c, Exp::int(4)), Err(TransportError::GuardViolation(_))));
        let m = parse_map("1/(x - x)").unwrap();
        assert_eq!(eval_map_on_arc(&m, &arc(&["t"]), Exp::int(4)), Err(TransportError::ZeroDivision));
        let m = parse_map("x^(1/3)").unwrap();
        let img = eval_map_on_arc(&m, &arc(&["-t"]), Exp::int(4)).unwrap();
        assert_eq!(img.component(0), &parse_series("-t^(1/3)").unwrap());
    }

    #[test]
    fn point_values() {
        let m = parse_map("(x*(1 + y^2/(x^2+y^2))^(1/4), y)").unwrap();
        let v = eval_map_point(&m, &[1.0, 1.0]).unwrap();
        assert!((v[0] - 1.5f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(real_pow(-8.0, Exp::new(1, 3)).unwrap(), -2.0);
        assert!(real_pow(-8.0, Exp::new(1, 2)).is_err());
        assert_eq!(eval_map_point(&m, &[1.0]), Err(TransportError::DimensionMismatch { expected: 2, found: 1 }));
    }
}
