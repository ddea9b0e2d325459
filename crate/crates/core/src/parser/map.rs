use std::collections::BTreeSet;

use super::lexer::Tok;
use super::series::parse_exponent;
use super::{Cursor, ParseError, SourceSpan};
use crate::qarith::{Exp, Rat};
use crate::transport::{Expr, MapExpr};

/// Parses a map such as `phi := (x*(1 + y^2/(x^2+y^2))^(1/4), y)`.
///
/// Variables are every identifier that appears, ordered alphabetically.
pub fn parse_map(text: &str) -> Result<MapExpr, ParseError> {
    parse_map_inner(text, None)
}

/// Like [`parse_map`] but with a fixed variable list; other identifiers are
/// rejected.
pub fn parse_map_with_vars(text: &str, vars: &[&str]) -> Result<MapExpr, ParseError> {
    parse_map_inner(text, Some(vars))
}

fn parse_map_inner(text: &str, declared: Option<&[&str]>) -> Result<MapExpr, ParseError> {
    let mut cur = Cursor::new(text)?;
    let mut p = MapParser { names: Vec::new(), declared };
    let name = match (cur.peek().clone(), cur.peek_at(1)) {
        (Tok::Ident(n), Tok::Assign) => {
            cur.bump();
            cur.bump();
            Some(n)
        }
        _ => None,
    };
    let mut outputs = Vec::new();
    let start = cur.pos();
    if cur.eat(&Tok::LParen) {
        let first = p.expr(&mut cur)?;
        if *cur.peek() == Tok::Comma {
            outputs.push(first);
            while cur.eat(&Tok::Comma) {
                outputs.push(p.expr(&mut cur)?);
            }
            cur.expect(&Tok::RParen, "`,` or `)`")?;
        } else {
            cur.reset(start);
        }
    }
    if outputs.is_empty() {
        outputs.push(p.expr(&mut cur)?);
    }
    if *cur.peek() != Tok::Eof {
        return Err(cur.unexpected("an operator or end of input"));
    }
    let vars: Vec<String> = match declared {
        Some(d) => d.iter().map(|s| s.to_string()).collect(),
        None => {
            // Indices were handed out in order of appearance; renumber
            // alphabetically.
            let sorted: Vec<String> = p.names.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
            let perm: Vec<usize> = p.names.iter().map(|n| sorted.iter().position(|s| s == n).unwrap()).collect();
            outputs = outputs.into_iter().map(|e| renumber(e, &perm)).collect();
            sorted
        }
    };
    Ok(MapExpr { name, vars, outputs })
}

fn renumber(e: Expr, perm: &[usize]) -> Expr {
    let r = |b: Box<Expr>| Box::new(renumber(*b, perm));
    match e {
        Expr::Var(i) => Expr::Var(perm[i]),
        Expr::Const(c) => Expr::Const(c),
        Expr::Add(a, b) => Expr::Add(r(a), r(b)),
        Expr::Sub(a, b) => Expr::Sub(r(a), r(b)),
        Expr::Mul(a, b) => Expr::Mul(r(a), r(b)),
        Expr::Div(a, b) => Expr::Div(r(a), r(b)),
        Expr::Neg(a) => Expr::Neg(r(a)),
        Expr::Pow(a, k) => Expr::Pow(r(a), k),
    }
}

struct MapParser<'a> {
    names: Vec<String>,
    declared: Option<&'a [&'a str]>,
}

impl MapParser<'_> {
    fn var_index(&mut self, name: &str, span: SourceSpan) -> Result<usize, ParseError> {
        if let Some(d) = self.declared {
            return d
                .iter()
                .position(|v| *v == name)
                .ok_or_else(|| ParseError::UnknownVariable { span, name: name.to_string() });
        }
        if let Some(i) = self.names.iter().position(|v| v == name) {
            return Ok(i);
        }
        self.names.push(name.to_string());
        Ok(self.names.len() - 1)
    }

    fn expr(&mut self, cur: &mut Cursor) -> Result<Expr, ParseError> {
        let mut lhs = self.term(cur)?;
        loop {
            if cur.eat(&Tok::Plus) {
                lhs = Expr::add(lhs, self.term(cur)?);
            } else if cur.eat(&Tok::Minus) {
                lhs = Expr::sub(lhs, self.term(cur)?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self, cur: &mut Cursor) -> Result<Expr, ParseError> {
        let mut lhs = self.unary(cur)?;
        loop {
            if cur.eat(&Tok::Star) {
                lhs = Expr::mul(lhs, self.unary(cur)?);
            } else if cur.eat(&Tok::Slash) {
                lhs = Expr::div(lhs, self.unary(cur)?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self, cur: &mut Cursor) -> Result<Expr, ParseError> {
        if cur.eat(&Tok::Minus) {
            Ok(Expr::neg(self.unary(cur)?))
        } else {
            self.power(cur)
        }
    }

    fn power(&mut self, cur: &mut Cursor) -> Result<Expr, ParseError> {
        let base = self.atom(cur)?;
        if cur.eat(&Tok::Caret) {
            let e = parse_exponent(cur)?;
            Ok(Expr::pow(base, e))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self, cur: &mut Cursor) -> Result<Expr, ParseError> {
        match cur.peek().clone() {
            Tok::Int(n) => {
                cur.bump();
                Ok(Expr::Const(Rat::new(n, 1).expect("unit denominator")))
            }
            Tok::Ident(name) => {
                let span = cur.span();
                cur.bump();
                Ok(Expr::Var(self.var_index(&name, span)?))
            }
            Tok::LParen => {
                cur.bump();
                let e = self.expr(cur)?;
                cur.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(cur.unexpected("a number, a variable or `(`")),
        }
    }
}

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_ATOM: u8 = 5;

/// Renders an expression so that parsing the text gives back the same tree.
pub fn render_expr(e: &Expr, names: &[String]) -> String {
    render_at(e, names, 0)
}

fn render_at(e: &Expr, names: &[String], min_prec: u8) -> String {
    let (text, prec) = match e {
        Expr::Var(i) => (names.get(*i).cloned().unwrap_or_else(|| format!("x{i}")), PREC_ATOM),
        Expr::Const(c) => {
            if c.is_integer() && c.signum() != std::cmp::Ordering::Less {
                (c.to_string(), PREC_ATOM)
            } else {
                (format!("({c})"), PREC_ATOM)
            }
        }
        Expr::Add(a, b) => {
            (format!("{} + {}", render_at(a, names, PREC_SUM), render_at(b, names, PREC_PRODUCT)), PREC_SUM)
        }
        Expr::Sub(a, b) => {
            (format!("{} - {}", render_at(a, names, PREC_SUM), render_at(b, names, PREC_PRODUCT)), PREC_SUM)
        }
        Expr::Mul(a, b) => {
            (format!("{}*{}", render_at(a, names, PREC_PRODUCT), render_at(b, names, PREC_UNARY)), PREC_PRODUCT)
        }
        Expr::Div(a, b) => {
            (format!("{}/{}", render_at(a, names, PREC_PRODUCT), render_at(b, names, PREC_UNARY)), PREC_PRODUCT)
        }
        Expr::Neg(a) => (format!("-{}", render_at(a, names, PREC_UNARY)), PREC_UNARY),
        Expr::Pow(a, k) => {
            let base = render_at(a, names, PREC_ATOM);
            (render_power(&base, *k), PREC_ATOM - 1)
        }
    };
    if prec < min_prec {
        format!("({text})")
    } else {
        text
    }
}

/// Renders a map as `name := (e1, e2)`; a single output is not wrapped.
pub fn render_map(m: &MapExpr) -> String {
    let body: Vec<String> = m.outputs.iter().map(|e| render_expr(e, &m.vars)).collect();
    let body = if body.len() == 1 { body[0].clone() } else { format!("({})", body.join(", ")) };
    match &m.name {
        Some(n) => format!("{n} := {body}"),
        None => body,
    }
}

/// Unlike series terms, `x^1` keeps its exponent so the tree survives.
fn render_power(base: &str, k: Exp) -> String {
    if k.is_integer() && !k.is_negative() {
        format!("{base}^{}", k.num())
    } else {
        format!("{base}^({k})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_phi() {
        let m = parse_map("phi := (x*(1 + y^2/(x^2+y^2))^(1/4), y)").unwrap();
        assert_eq!(m.name.as_deref(), Some("phi"));
        assert_eq!(m.vars, vec!["x", "y"]);
        assert_eq!(m.outputs.len(), 2);
        let x = Expr::Var(0);
        let y = Expr::Var(1);
        let sq = |e: Expr| Expr::pow(e, Exp::int(2));
        let p = Expr::add(Expr::int(1), Expr::div(sq(y.clone()), Expr::add(sq(x.clone()), sq(y.clone()))));
        assert_eq!(m.outputs[0], Expr::mul(x, Expr::pow(p, Exp::new(1, 4))));
        assert_eq!(m.outputs[1], y);
    }

    #[test]
    fn reads_whitney_and_single_variable() {
        let m = parse_map("(u, u*v, v^(2/1))").unwrap();
        assert_eq!(m.vars, vec!["u", "v"]);
        assert_eq!(m.outputs[2], Expr::pow(Expr::Var(1), Exp::int(2)));
        let m = parse_map("x").unwrap();
        assert_eq!(m.outputs, vec![Expr::Var(0)]);
        let m = parse_map("(x + 1)*y").unwrap();
        assert_eq!(m.outputs.len(), 1);
    }

    #[test]
    fn variables_sorted_alphabetically() {
        let m = parse_map("(y, x)").unwrap();
        assert_eq!(m.vars, vec!["x", "y"]);
        assert_eq!(m.outputs, vec![Expr::Var(1), Expr::Var(0)]);
    }

    #[test]
    fn precedence() {
        let m = parse_map("-x^2").unwrap();
        assert_eq!(m.outputs[0], Expr::neg(Expr::pow(Expr::Var(0), Exp::int(2))));
        let m = parse_map("1/4*x - -2").unwrap();
        assert_eq!(m.outputs[0], Expr::sub(Expr::mul(Expr::Const(Rat::frac(1, 4)), Expr::Var(0)), Expr::int(-2)));
    }

    #[test]
    fn errors_carry_spans() {
        let err = parse_map_with_vars("x + z", &["x", "y"]).unwrap_err();
        assert!(matches!(err, ParseError::UnknownVariable { span, .. } if span.start == 4));
        assert!(matches!(parse_map("x^y").unwrap_err(), ParseError::NonRationalExponent { .. }));
        assert!(parse_map("(x, y").is_err());
        assert!(parse_map("x +").is_err());
        assert!(parse_map("").is_err());
    }

    #[test]
    fn render_round_trip() {
        for text in [
            "phi := (x*(1 + y^2/(x^2 + y^2))^(1/4), y)",
            "(u, u*v, v^2)",
            "-x^2 + (-1/3)*y",
            "(x - (y - 1))/(x*y)^(-1)",
            "x*-y",
        ] {
            let m = parse_map(text).unwrap();
            let again = parse_map(&render_map(&m)).unwrap();
            assert_eq!(m, again, "{text}");
        }
        assert_eq!(render_map(&parse_map("(u, u*v, v^(2/1))").unwrap()), "(u, u*v, v^2)");
    }
}
