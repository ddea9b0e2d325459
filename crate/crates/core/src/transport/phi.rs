//! The homeomorphism `phi(x, y) = (x P(x,y)^(1/4), y)` with
//! `P = 1 + y^2/(x^2+y^2)`, its analytic chart lifts, and the family of
//! arcs `(eps t, t^2)` whose images fail to converge coefficientwise.

use super::{eval_map_on_arc, eval_point, lift_arc_blowup, BlowupChart, Expr, MapExpr, TransportError};
use crate::par::{self, Exec};
use crate::param::{LaurentEps, ParamSeries};
use crate::parser::parse_map;
use crate::puiseux::{Arc, Coeff, Series};
use crate::qarith::{Bound, Exp};

pub fn phi_map() -> MapExpr {
    parse_map("phi := (x*(1 + y^2/(x^2 + y^2))^(1/4), y)").expect("valid literal")
}

/// `(Phi_U, Phi_V)`: the lifts of `phi` to the charts of the blow-up.
pub fn phi_chart_maps() -> (MapExpr, MapExpr) {
    let u = parse_map("Phi_U := (u*(1 + v^2/(1 + v^2))^(1/4), v*(1 + v^2/(1 + v^2))^(-1/4))").expect("valid literal");
    let v = parse_map_vars("Phi_V := (u*(1 + 1/(u^2 + 1))^(1/4), v)", &["u", "v"]);
    (u, v)
}

fn parse_map_vars(text: &str, vars: &[&str]) -> MapExpr {
    crate::parser::parse_map_with_vars(text, vars).expect("valid literal")
}

/// `x^2 y^2 / (2 (x^2+y^2) (x^2+2y^2))`: for fixed `y != 0`, the derivative
/// of `x -> x P(x,y)^(1/4)` is `P^(1/4) (1 - m(x,y))` with `m` this term.
/// It depends only on `s = (x/y)^2`, as `s / (2 (s+1) (s+2))`.
pub fn monotone_expr() -> MapExpr {
    parse_map("x^2*y^2/(2*(x^2 + y^2)*(x^2 + 2*y^2))").expect("valid literal")
}

/// The arc `(eps t, t^2)`.
pub fn family_arc() -> Arc<LaurentEps> {
    Arc::new(vec![Series::monomial(LaurentEps::eps(), Exp::ONE), Series::monomial(LaurentEps::one(), Exp::int(2))])
}

/// `phi_*(eps t, t^2)` computed through the blow-up: lift to chart `U`,
/// apply `Phi_U`, project back. The first component is cut at `t_order`;
/// the second is `y` itself and therefore exactly `t^2`.
pub fn counterexample_pushforward(t_order: Exp) -> Result<(ParamSeries, ParamSeries), TransportError> {
    if t_order < Exp::int(3) {
        return Err(TransportError::OrderTooLow(t_order));
    }
    let c = family_arc();
    let (chart, lifted) = lift_arc_blowup(&c, t_order)?;
    debug_assert_eq!(chart, BlowupChart::U);
    let (phi_u, _) = phi_chart_maps();
    let moved = eval_map_on_arc(&phi_u, &lifted, t_order)?;
    let down = chart.push(&moved);
    let first = down.component(0).truncate(Bound::Finite(t_order));
    let second = eval_map_on_arc(&phi_map(), &c, t_order)?.component(1).clone();
    // Through the chart the second component is t^2 Phi_1 Phi_2.
    let via_chart = down.component(1);
    if !(via_chart - &second).is_zero_up_to_truncation() && !(via_chart - &second).is_exact_zero() {
        return Err(TransportError::Inconsistent("second component differs between routes".into()));
    }
    Ok((first, second))
}

/// `Phi_1 Phi_2 - 1` along `(u, v) = (t, t)`, where `Phi_1 = P(1,v)^(1/4)`
/// and `Phi_2 = P(1,v)^(-1/4)`, expanded to `order`. An exact identity
/// leaves no term below `order`.
pub fn phi_product_residual(order: Exp) -> Result<crate::puiseux::PuiseuxSeries, TransportError> {
    let p = parse_map("(1 + v^2/(1 + v^2))^(1/4)*(1 + v^2/(1 + v^2))^(-1/4)").expect("valid literal");
    let arc = Arc::new(vec![Series::t()]);
    let prod = eval_map_on_arc(&p, &arc, order)?;
    Ok(prod.component(0) - &Series::one())
}

/// Grid over a square, `[lo, hi]^2` with spacing `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn points_per_axis(&self) -> usize {
        ((self.hi - self.lo) / self.step).round() as usize + 1
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }
}

/// Maximum of [`monotone_expr`] over the grid, skipping the line `y = 0`.
pub fn monotone_bound_check(grid: GridSpec, exec: Exec) -> f64 {
    let n = grid.points_per_axis();
    let row = |j: usize| {
        let y = grid.coord(j);
        if y.abs() < grid.step / 2.0 {
            return f64::NEG_INFINITY;
        }
        let y2 = y * y;
        (0..n)
            .map(|i| {
                let x2 = grid.coord(i).powi(2);
                x2 * y2 / (2.0 * (x2 + y2) * (x2 + 2.0 * y2))
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    par::map_reduce(exec, 0..n, row, f64::NEG_INFINITY, f64::max)
}

/// Pointwise value of the monotonicity term via the expression tree.
pub fn monotone_value(x: f64, y: f64) -> Result<f64, TransportError> {
    eval_point(&monotone_expr().outputs[0], &[x, y])
}

/// Minimum of `|det J|` over the points.
pub fn jacobian_check(f: &MapExpr, points: &[Vec<f64>], exec: Exec) -> Result<f64, TransportError> {
    if f.input_dim() != f.output_dim() {
        return Err(TransportError::DimensionMismatch { expected: f.input_dim(), found: f.output_dim() });
    }
    let jac = f.jacobian();
    let dets = par::map_collect(exec, points, |p| jacobian_det(&jac, p));
    let mut best = f64::INFINITY;
    for d in dets {
        best = best.min(d?.abs());
    }
    Ok(best)
}

/// Determinant of the Jacobian matrix at a point.
pub fn jacobian_det(jac: &[Vec<Expr>], p: &[f64]) -> Result<f64, TransportError> {
    let mut m = Vec::with_capacity(jac.len());
    for row in jac {
        let vals: Result<Vec<f64>, _> = row.iter().map(|e| eval_point(e, p)).collect();
        m.push(vals?);
    }
    Ok(det(m))
}

/// Determinant by Gaussian elimination with partial pivoting.
fn det(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut acc = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            acc = -acc;
        }
        acc *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            let pivot = m[col].clone();
            for (x, p) in m[r][col..n].iter_mut().zip(&pivot[col..n]) {
                *x -= f * p;
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::divergence_witness;
    use crate::parser::render_param_series;

    #[test]
    fn pushforward_of_the_family() {
        let (a, b) = counterexample_pushforward(Exp::int(5)).unwrap();
        assert_eq!(render_param_series(&a), "eps*t + 1/4*eps^(-1)*t^3 + O(t^5)");
        assert_eq!(render_param_series(&b), "t^2");
        let (a, _) = counterexample_pushforward(Exp::int(7)).unwrap();
        assert_eq!(render_param_series(&a), "eps*t + 1/4*eps^(-1)*t^3 - 11/32*eps^(-3)*t^5 + O(t^7)");
        let w = divergence_witness(&a).unwrap();
        assert_eq!((w.t_exp, w.eps_exp), (Exp::int(3), -1));
        assert!(counterexample_pushforward(Exp::int(2)).is_err());
    }

    #[test]
    fn direct_route_agrees() {
        let order = Exp::int(9);
        let (a, _) = counterexample_pushforward(order).unwrap();
        let direct = eval_map_on_arc(&phi_map(), &family_arc(), order).unwrap();
        assert_eq!(direct.component(0).truncate(Bound::Finite(order)), a);
    }

    #[test]
    fn product_identity() {
        let r = phi_product_residual(Exp::int(12)).unwrap();
        assert!(r.terms().is_empty());
        assert_eq!(r.trunc(), Bound::Finite(Exp::int(12)));
    }

    #[test]
    fn chart_map_examples() {
        let (u, _) = phi_chart_maps();
        let v = super::super::eval_map_point(&u, &[0.0, 0.0]).unwrap();
        assert_eq!(v, vec![0.0, 0.0]);
        let v = super::super::eval_map_point(&u, &[0.3, 0.0]).unwrap();
        assert_eq!(v, vec![0.3, 0.0]);
        let d = jacobian_check(&u, &[vec![0.0, 0.0]], Exec::Sequential).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        let pi = BlowupChart::U.projection();
        let d = jacobian_check(&pi, &[vec![0.5, 3.0]], Exec::Sequential).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        assert_eq!(jacobian_check(&pi, &[vec![0.0, 3.0]], Exec::Sequential).unwrap(), 0.0);
    }

    #[test]
    fn monotone_term() {
        assert_eq!(monotone_value(0.0, 1.0).unwrap(), 0.0);
        let a = monotone_value(0.3, -0.7).unwrap();
        let b = monotone_value(3.0, -7.0).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        let m = monotone_bound_check(GridSpec { lo: -1.0, hi: 1.0, step: 0.01 }, Exec::Sequential);
        assert!(m <= 0.25 && m > 0.085);
        // Against a central difference of x -> x P(x,y)^(1/4).
        let phi = phi_map();
        let h = |x: f64| super::super::eval_map_point(&phi, &[x, 0.8]).unwrap()[0];
        let (x, dx) = (0.37, 1e-6);
        let fd = (h(x + dx) - h(x - dx)) / (2.0 * dx);
        let p = 1.0 + 0.64 / (x * x + 0.64);
        let exact = p.powf(0.25) * (1.0 - monotone_value(x, 0.8).unwrap());
        assert!((fd - exact).abs() < 1e-8);
    }
}
