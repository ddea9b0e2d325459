//! Expression trees for semialgebraic maps.

use std::fmt;

use crate::qarith::{Exp, Rat};

/// A scalar expression in the input variables of a map.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(usize),
    Const(Rat),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    /// Rational power. An even denominator requires a positive base.
    Pow(Box<Expr>, Exp),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn constant(c: Rat) -> Expr {
        Expr::Const(c)
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(Rat::int(n))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    /// Division; a quotient of two literals folds into a single constant.
    pub fn div(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) if !y.is_zero() => Expr::Const(x / y),
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    /// Negation; the negation of a literal folds into a single constant.
    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn pow(a: Expr, e: Exp) -> Expr {
        Expr::Pow(Box::new(a), e)
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::Const(_) => None,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.max_var().max(b.max_var()),
            Expr::Neg(a) | Expr::Pow(a, _) => a.max_var(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) => 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
            Expr::Neg(a) | Expr::Pow(a, _) => 1 + a.node_count(),
        }
    }

    /// Partial derivative with respect to variable `i`, lightly simplified.
    pub fn derivative(&self, i: usize) -> Expr {
        use Expr::*;
        match self {
            Var(j) => Expr::int(if *j == i { 1 } else { 0 }),
            Const(_) => Expr::int(0),
            Add(a, b) => s_add(a.derivative(i), b.derivative(i)),
            Sub(a, b) => s_sub(a.derivative(i), b.derivative(i)),
            Mul(a, b) => s_add(s_mul(a.derivative(i), (**b).clone()), s_mul((**a).clone(), b.derivative(i))),
            Div(a, b) => {
                // (a'b - ab') / b^2
                let num = s_sub(s_mul(a.derivative(i), (**b).clone()), s_mul((**a).clone(), b.derivative(i)));
                if is_zero(&num) {
                    Expr::int(0)
                } else {
                    Expr::div(num, Expr::pow((**b).clone(), Exp::int(2)))
                }
            }
            Neg(a) => {
                let d = a.derivative(i);
                if is_zero(&d) {
                    d
                } else {
                    Expr::neg(d)
                }
            }
            Pow(a, e) => {
                let d = a.derivative(i);
                if is_zero(&d) {
                    return Expr::int(0);
                }
                let lowered = if *e == Exp::ONE { Expr::int(1) } else { Expr::pow((**a).clone(), *e - Exp::ONE) };
                s_mul(s_mul(Expr::Const(Rat::from(*e)), lowered), d)
            }
        }
    }
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if c.is_zero())
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if *c == Rat::one())
}

fn s_add(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        b
    } else if is_zero(&b) {
        a
    } else {
        Expr::add(a, b)
    }
}

fn s_sub(a: Expr, b: Expr) -> Expr {
    if is_zero(&b) {
        a
    } else if is_zero(&a) {
        Expr::neg(b)
    } else {
        Expr::sub(a, b)
    }
}

fn s_mul(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) || is_zero(&b) {
        Expr::int(0)
    } else if is_one(&a) {
        b
    } else if is_one(&b) {
        a
    } else {
        Expr::mul(a, b)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..=self.max_var().unwrap_or(0)).map(|i| format!("x{i}")).collect();
        write!(f, "{}", crate::parser::render_expr(self, &names))
    }
}

/// A map `R^n -> R^m` given by one expression per output coordinate.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MapExpr {
    pub name: Option<String>,
    pub vars: Vec<String>,
    pub outputs: Vec<Expr>,
}

impl MapExpr {
    /// Panics if an expression uses a variable index outside `vars`.
    pub fn new(vars: Vec<String>, outputs: Vec<Expr>) -> MapExpr {
        let m = MapExpr { name: None, vars, outputs };
        assert!(m.is_well_formed(), "variable index out of range");
        m
    }

    pub fn named(mut self, name: &str) -> MapExpr {
        self.name = Some(name.to_string());
        self
    }

    pub fn is_well_formed(&self) -> bool {
        self.outputs.iter().all(|e| e.max_var().is_none_or(|i| i < self.vars.len()))
    }

    pub fn input_dim(&self) -> usize {
        self.vars.len()
    }

    pub fn output_dim(&self) -> usize {
        self.outputs.len()
    }

    /// The identity map on the given variables.
    pub fn identity(vars: &[&str]) -> MapExpr {
        MapExpr::new(vars.iter().map(|s| s.to_string()).collect(), (0..vars.len()).map(Expr::Var).collect())
    }

    /// Jacobian as a matrix of expressions, `[output][input]`.
    pub fn jacobian(&self) -> Vec<Vec<Expr>> {
        self.outputs.iter().map(|e| (0..self.input_dim()).map(|i| e.derivative(i)).collect()).collect()
    }
}

impl fmt::Debug for MapExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parser::render_map(self))
    }
}

impl fmt::Display for MapExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parser::render_map(self))
    }
}
