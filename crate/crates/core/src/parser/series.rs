use num::{BigInt, ToPrimitive};

use super::lexer::Tok;
use super::{Cursor, ParseError, SourceSpan};
use crate::param::ParamSeries;
use crate::puiseux::{Arc, Coeff, PuiseuxSeries, Series};
use crate::qarith::{Bound, Exp, Rat};

/// Parses a series literal such as `3/2*t^(5/2) - t^3 + O(t^4)`.
pub fn parse_series(text: &str) -> Result<PuiseuxSeries, ParseError> {
    let mut cur = Cursor::new(text)?;
    let s = parse_series_at(&mut cur)?;
    if *cur.peek() != Tok::Eof {
        return Err(cur.unexpected("`+`, `-` or end of input"));
    }
    Ok(s)
}

/// Parses an arc `(s1, ..., sn)` of series literals; a lone series is an
/// arc of dimension one.
pub fn parse_arc(text: &str) -> Result<Arc, ParseError> {
    let tuple = || -> Result<Arc, ParseError> {
        let mut cur = Cursor::new(text)?;
        cur.expect(&Tok::LParen, "`(`")?;
        let mut parts = vec![parse_series_at(&mut cur)?];
        while cur.eat(&Tok::Comma) {
            parts.push(parse_series_at(&mut cur)?);
        }
        cur.expect(&Tok::RParen, "`,` or `)`")?;
        if *cur.peek() != Tok::Eof {
            return Err(cur.unexpected("end of input"));
        }
        Ok(Arc::new(parts))
    };
    match tuple() {
        Ok(a) => Ok(a),
        Err(e) if text.contains(',') => Err(e),
        Err(_) => parse_series(text).map(|s| Arc::new(vec![s])),
    }
}

/// Series grammar starting at the cursor; stops before `;`, `)` or end.
pub(crate) fn parse_series_at(cur: &mut Cursor) -> Result<PuiseuxSeries, ParseError> {
    let mut terms: Vec<(Exp, Rat, SourceSpan)> = Vec::new();
    let mut trunc = Bound::Infinite;
    let mut negative = cur.eat(&Tok::Minus);
    let mut first = true;
    loop {
        if is_big_o(cur) {
            if negative {
                return Err(cur.unexpected("a term after `-`"));
            }
            trunc = Bound::Finite(parse_big_o(cur)?);
            break;
        }
        if !first || negative || !matches!(cur.peek(), Tok::Eof) {
            let start = cur.span().start;
            let (e, c) = parse_term(cur)?;
            let span = SourceSpan::new(start, cur.prev_span().end);
            let c = if negative { -c } else { c };
            if terms.iter().any(|(x, _, _)| *x == e) {
                return Err(ParseError::DuplicateExponent { span, exp: e.to_string() });
            }
            terms.push((e, c, span));
        } else {
            return Err(cur.unexpected("a series term"));
        }
        first = false;
        match cur.peek() {
            Tok::Plus => {
                cur.bump();
                negative = false;
            }
            Tok::Minus => {
                cur.bump();
                negative = true;
            }
            _ => break,
        }
    }
    for (e, _, span) in &terms {
        if !trunc.exceeds(*e) {
            return Err(ParseError::Unsupported {
                span: *span,
                what: format!("term t^{e} is not below the truncation order"),
            });
        }
    }
    let s = Series::from_terms(terms.into_iter().map(|(e, c, _)| (e, c)), trunc);
    Ok(s)
}

fn is_big_o(cur: &Cursor) -> bool {
    matches!(cur.peek(), Tok::Ident(s) if s == "O") && *cur.peek_at(1) == Tok::LParen
}

fn parse_big_o(cur: &mut Cursor) -> Result<Exp, ParseError> {
    cur.bump();
    cur.expect(&Tok::LParen, "`(`")?;
    let e = parse_t_power(cur)?;
    cur.expect(&Tok::RParen, "`)`")?;
    Ok(e)
}

/// `rat ['*' tpow] | tpow`
fn parse_term(cur: &mut Cursor) -> Result<(Exp, Rat), ParseError> {
    match cur.peek() {
        Tok::Int(_) => {
            let c = parse_rat(cur)?;
            if cur.eat(&Tok::Star) {
                Ok((parse_t_power(cur)?, c))
            } else {
                Ok((Exp::ZERO, c))
            }
        }
        Tok::Ident(s) if s == "t" => Ok((parse_t_power(cur)?, Rat::one())),
        _ => Err(cur.unexpected("a rational coefficient or `t`")),
    }
}

fn parse_rat(cur: &mut Cursor) -> Result<Rat, ParseError> {
    let num = parse_int(cur)?;
    if cur.eat(&Tok::Slash) {
        let span = cur.span();
        let den = parse_int(cur)?;
        return Rat::new(num, den).map_err(|_| ParseError::Syntax {
            span,
            expected: "a nonzero denominator".into(),
            found: "`0`".into(),
        });
    }
    Ok(Rat::new(num, 1).expect("unit denominator"))
}

fn parse_int(cur: &mut Cursor) -> Result<BigInt, ParseError> {
    match cur.peek().clone() {
        Tok::Int(n) => {
            cur.bump();
            Ok(n)
        }
        _ => Err(cur.unexpected("an integer")),
    }
}

/// `'t' ['^' exp]`
fn parse_t_power(cur: &mut Cursor) -> Result<Exp, ParseError> {
    match cur.peek() {
        Tok::Ident(s) if s == "t" => {
            cur.bump();
        }
        _ => return Err(cur.unexpected("`t`")),
    }
    if cur.eat(&Tok::Caret) {
        parse_exponent(cur)
    } else {
        Ok(Exp::ONE)
    }
}

/// `int | '(' ['-'] int ['/' posint] ')'`; a bare int may carry a sign.
pub(crate) fn parse_exponent(cur: &mut Cursor) -> Result<Exp, ParseError> {
    let start = cur.span();
    let out_of_range = |span| ParseError::Unsupported { span, what: "exponent out of range".into() };
    let small = |n: BigInt, span| n.to_i64().filter(|v| v.abs() < 1 << 40).ok_or(out_of_range(span));
    if cur.eat(&Tok::LParen) {
        let neg = cur.eat(&Tok::Minus);
        let num = match cur.peek().clone() {
            Tok::Int(n) => {
                cur.bump();
                small(n, cur.prev_span())?
            }
            _ => return Err(ParseError::NonRationalExponent { span: cur.span() }),
        };
        let den = if cur.eat(&Tok::Slash) {
            match cur.peek().clone() {
                Tok::Int(n) if n != BigInt::from(0) => {
                    cur.bump();
                    small(n, cur.prev_span())?
                }
                _ => return Err(ParseError::NonRationalExponent { span: cur.span() }),
            }
        } else {
            1
        };
        if *cur.peek() != Tok::RParen {
            return Err(ParseError::NonRationalExponent { span: cur.span() });
        }
        cur.bump();
        let num = if neg { -num } else { num };
        return Ok(Exp::new(num, den));
    }
    let neg = cur.eat(&Tok::Minus);
    match cur.peek().clone() {
        Tok::Int(n) => {
            cur.bump();
            let v = small(n, cur.prev_span())?;
            Ok(Exp::int(if neg { -v } else { v }))
        }
        _ => Err(ParseError::NonRationalExponent { span: SourceSpan::new(start.start, cur.span().end) }),
    }
}

pub(crate) fn render_exp_power(var: &str, e: Exp) -> String {
    if e == Exp::ONE {
        var.to_string()
    } else if e.is_integer() && !e.is_negative() {
        format!("{var}^{}", e.num())
    } else {
        format!("{var}^({e})")
    }
}

/// Renders a series with a caller-supplied coefficient formatter.
///
/// Coefficients whose rendering contains a top-level sum are parenthesized.
pub fn render_series_with<C: Coeff>(s: &Series<C>, fmt_coeff: impl Fn(&C) -> String) -> String {
    let mut out = String::new();
    for (i, (e, c)) in s.terms().iter().enumerate() {
        let text = fmt_coeff(c);
        let compound = text.contains(" + ") || text.contains(" - ");
        let (neg, mag) = if !compound && text.starts_with('-') {
            (true, text[1..].to_string())
        } else if compound {
            (false, format!("({text})"))
        } else {
            (false, text)
        };
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if *e == Exp::ZERO {
            out.push_str(&mag);
        } else if mag == "1" {
            out.push_str(&render_exp_power("t", *e));
        } else {
            out.push_str(&mag);
            out.push('*');
            out.push_str(&render_exp_power("t", *e));
        }
    }
    if let Bound::Finite(e) = s.trunc() {
        if !out.is_empty() {
            out.push_str(" + ");
        }
        let body = if e == Exp::ONE { "t".to_string() } else { render_exp_power("t", e) };
        let body = if e == Exp::ZERO { "t^0".to_string() } else { body };
        out.push_str(&format!("O({body})"));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

pub fn render_series(s: &PuiseuxSeries) -> String {
    render_series_with(s, |c| c.to_string())
}

pub fn render_param_series(p: &ParamSeries) -> String {
    render_series_with(p, |c| c.render())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arcs() {
        let a = parse_arc("(t, t^2 + O(t^3))").unwrap();
        assert_eq!(a.to_string(), "(t, t^2 + O(t^3))");
        assert_eq!(parse_arc("1/2*t").unwrap().dim(), 1);
        assert_eq!(parse_arc("(t + t^2)").unwrap().to_string(), "(t + t^2)");
        let e = parse_arc("(t, x)").unwrap_err();
        assert_eq!(e.span(), SourceSpan::new(4, 5));
    }

    #[test]
    fn reads_mixed_literal() {
        let s = parse_series("3/2*t^(5/2) - t^3 + O(t^4)").unwrap();
        assert_eq!(s.terms(), &[(Exp::new(5, 2), Rat::frac(3, 2)), (Exp::int(3), Rat::int(-1))]);
        assert_eq!(s.trunc(), Bound::Finite(Exp::int(4)));
        assert_eq!(s.ram(), 2);
    }

    #[test]
    fn reads_t_and_ramification() {
        let s = parse_series("t").unwrap();
        assert_eq!(s, PuiseuxSeries::t());
        assert!(s.is_exact());
        let s = parse_series("1 + t^(1/2) + t^(1/3)").unwrap();
        assert_eq!(s.ram(), 6);
        assert_eq!(s.terms().len(), 3);
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        let err = parse_series("t^2 + 3*t^2").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateExponent { .. }));
        let err = parse_series("t^1/2").unwrap_err();
        assert_eq!(err.span().start, 3);
        let err = parse_series("t^(x)").unwrap_err();
        assert!(matches!(err, ParseError::NonRationalExponent { .. }));
        assert!(parse_series("").is_err());
        assert!(parse_series("t + O(t^1)").is_err());
        assert!(parse_series("é").unwrap_err().span().end == 2);
    }

    #[test]
    fn renders() {
        assert_eq!(render_series(&parse_series("t^2").unwrap()), "t^2");
        let s = parse_series("1 + 1/4*t^3 + O(t^5)").unwrap();
        assert_eq!(render_series(&s), "1 + 1/4*t^3 + O(t^5)");
        assert_eq!(render_series(&parse_series("-t + t^(-1)").unwrap()), "t^(-1) - t");
        assert_eq!(render_series(&PuiseuxSeries::zero()), "0");
        assert_eq!(render_series(&PuiseuxSeries::big_o(Exp::new(7, 2))), "O(t^(7/2))");
        assert_eq!(parse_series("O(t^(7/2))").unwrap(), PuiseuxSeries::big_o(Exp::new(7, 2)));
    }
}
