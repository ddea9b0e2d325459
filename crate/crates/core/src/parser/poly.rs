use super::lexer::Tok;
use super::series::parse_series_at;
use super::{parse_map_with_vars, Cursor, ParseError, SourceSpan};
use crate::puiseux::{Coeff, PuiseuxSeries, Series};
use crate::qarith::Exp;
use crate::transport::Expr;

/// Parses a polynomial in `X` with series coefficients in `t`, such as
/// `X^2 - (t + t^2)`. Returns the coefficient of `X^j` at index `j`.
///
/// Division is allowed only by monomials in `t`, and fractional powers only
/// of monomials in `t`.
pub fn parse_poly(text: &str) -> Result<Vec<PuiseuxSeries>, ParseError> {
    let m = parse_map_with_vars(text, &["X", "t"])?;
    let whole = SourceSpan::new(0, text.len());
    if m.outputs.len() != 1 {
        return Err(ParseError::Unsupported { span: whole, what: "expected a single polynomial".into() });
    }
    let mut p = expand(&m.outputs[0]).map_err(|what| ParseError::Unsupported { span: whole, what })?;
    trim(&mut p);
    Ok(p)
}

/// Parses `c0; c1; ...; cd`, the coefficients of `X^0 .. X^d`.
pub fn parse_coeff_list(text: &str) -> Result<Vec<PuiseuxSeries>, ParseError> {
    let mut cur = Cursor::new(text)?;
    let mut out = vec![parse_series_at(&mut cur)?];
    while cur.eat(&Tok::Semi) {
        out.push(parse_series_at(&mut cur)?);
    }
    if *cur.peek() != Tok::Eof {
        return Err(cur.unexpected("`;` or end of input"));
    }
    Ok(out)
}

type Poly = Vec<PuiseuxSeries>;

const MAX_POWER: i64 = 64;

fn trim(p: &mut Poly) {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_exact_zero()) {
        p.pop();
    }
}

fn add(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    let zero = Series::zero();
    let mut out: Poly = (0..n).map(|i| a.get(i).unwrap_or(&zero) + b.get(i).unwrap_or(&zero)).collect();
    trim(&mut out);
    out
}

fn neg(a: &Poly) -> Poly {
    a.iter().map(|c| -c).collect()
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![Series::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    trim(&mut out);
    out
}

/// The coefficient if `p` is a nonzero monomial in `t` (degree 0 in `X`).
fn as_monomial(p: &Poly) -> Option<&PuiseuxSeries> {
    match p.as_slice() {
        [c] if c.is_exact() && c.terms().len() == 1 => Some(c),
        _ => None,
    }
}

fn monomial_pow(m: &PuiseuxSeries, k: Exp) -> Result<PuiseuxSeries, String> {
    let (e, c) = m.leading().expect("nonzero monomial");
    let c = c.rat_pow(k).map_err(|e| e.to_string())?;
    Ok(Series::monomial(c, e * k))
}

fn expand(e: &Expr) -> Result<Poly, String> {
    Ok(match e {
        Expr::Var(0) => vec![Series::zero(), Series::one()],
        Expr::Var(_) => vec![Series::t()],
        Expr::Const(c) => vec![Series::constant(c.clone())],
        Expr::Add(a, b) => add(&expand(a)?, &expand(b)?),
        Expr::Sub(a, b) => add(&expand(a)?, &neg(&expand(b)?)),
        Expr::Mul(a, b) => mul(&expand(a)?, &expand(b)?),
        Expr::Neg(a) => neg(&expand(a)?),
        Expr::Div(a, b) => {
            let den = expand(b)?;
            let m = as_monomial(&den).ok_or("division by something other than a monomial in t")?;
            mul(&expand(a)?, &vec![monomial_pow(m, -Exp::ONE)?])
        }
        Expr::Pow(a, k) => {
            let base = expand(a)?;
            if k.is_integer() && !k.is_negative() {
                if k.num() > MAX_POWER {
                    return Err(format!("power {k} is too large"));
                }
                let mut acc = vec![Series::one()];
                for _ in 0..k.num() {
                    acc = mul(&acc, &base);
                }
                acc
            } else {
                let m = as_monomial(&base).ok_or("fractional or negative power of a non-monomial")?;
                vec![monomial_pow(m, *k)?]
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_series;
    use crate::qarith::Bound;

    #[test]
    fn expands_polynomials() {
        let p = parse_poly("X^2 - (t + t^2)").unwrap();
        assert_eq!(p, vec![parse_series("-t - t^2").unwrap(), Series::zero(), Series::one()]);
        let p = parse_poly("X^3 + t*X - t").unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p[1], Series::t());
        let p = parse_poly("X/t^2 + t^(1/2)").unwrap();
        assert_eq!(p[1], parse_series("t^(-2)").unwrap());
        assert_eq!(p[0], parse_series("t^(1/2)").unwrap());
    }

    #[test]
    fn rejects_non_polynomials() {
        assert!(parse_poly("1/X").is_err());
        assert!(parse_poly("X^(1/2)").is_err());
        assert!(parse_poly("(1+t)^(1/2)").is_err());
        assert!(matches!(parse_poly("X + y").unwrap_err(), ParseError::UnknownVariable { .. }));
    }

    #[test]
    fn coefficient_lists() {
        let p = parse_coeff_list("-t - t^2 + O(t^5); 0; 1").unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].trunc(), Bound::Finite(Exp::int(5)));
        assert!(parse_coeff_list("t;").is_err());
    }
}
