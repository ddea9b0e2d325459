//! Real roots of univariate polynomials over the coefficient fields, used
//! for the characteristic equations of Newton polygon edges.

use std::cmp::Ordering;

use num::{BigInt, Integer, One, Signed, ToPrimitive};

use super::NewtonError;
use crate::puiseux::Coeff;
use crate::qarith::Rat;

/// Coefficient fields in which the real roots of a polynomial can be found.
pub trait RootField: Coeff {
    /// Nonzero real roots of `sum coeffs[i] z^i`, ascending, with
    /// multiplicities. `coeffs` has a nonzero constant and leading term.
    fn real_roots(coeffs: &[Self]) -> Result<Vec<(Self, u32)>, NewtonError>;

    /// Nearest float, for numeric checks.
    fn approx(&self) -> f64;
}

// Divisor enumeration is by trial division; larger coefficients are refused.
const MAX_DIVISOR_SEARCH: u64 = 1_000_000_000_000;

impl RootField for Rat {
    fn real_roots(coeffs: &[Rat]) -> Result<Vec<(Rat, u32)>, NewtonError> {
        let mut p: Vec<Rat> = coeffs.to_vec();
        let mut found = Vec::new();
        let ints = integer_coeffs(&p);
        let a0 = divisors(ints.first().unwrap())?;
        let an = divisors(ints.last().unwrap())?;
        let mut candidates: Vec<Rat> = Vec::new();
        for num in &a0 {
            for den in &an {
                let r = Rat::new(num.clone(), den.clone()).expect("positive divisor");
                candidates.push(r.clone());
                candidates.push(-r);
            }
        }
        candidates.sort();
        candidates.dedup();
        for r in candidates {
            let mut mult = 0;
            while p.len() > 1 {
                let (q, rem) = deflate(&p, &r);
                if !rem.is_zero() {
                    break;
                }
                p = q;
                mult += 1;
            }
            if mult > 0 {
                found.push((r, mult));
            }
        }
        if p.len() > 1 && sturm_count(&p) > 0 {
            return Err(NewtonError::IrrationalBranch);
        }
        Ok(found)
    }

    fn approx(&self) -> f64 {
        self.to_f64()
    }
}

/// Scales to a primitive integer polynomial with the same roots.
fn integer_coeffs(p: &[Rat]) -> Vec<BigInt> {
    let l = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(&c.denom()));
    p.iter().map(|c| c.numer() * (&l / c.denom())).collect()
}

fn divisors(n: &BigInt) -> Result<Vec<BigInt>, NewtonError> {
    let n = n.abs().to_u64().filter(|v| *v <= MAX_DIVISOR_SEARCH).ok_or(NewtonError::CoefficientTooLarge)?;
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(BigInt::from(d));
            if d * d != n {
                large.push(BigInt::from(n / d));
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    Ok(small)
}

/// Synthetic division by `z - r`: quotient and remainder.
fn deflate(p: &[Rat], r: &Rat) -> (Vec<Rat>, Rat) {
    let n = p.len();
    let mut q = vec![Rat::zero(); n - 1];
    let mut acc = Rat::zero();
    for i in (0..n).rev() {
        acc = &acc * r + &p[i];
        if i > 0 {
            q[i - 1] = acc.clone();
        }
    }
    (q, acc)
}

fn trim(mut p: Vec<Rat>) -> Vec<Rat> {
    while p.len() > 1 && p.last().is_some_and(Rat::is_zero) {
        p.pop();
    }
    p
}

fn poly_rem(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut r = a.to_vec();
    let lead = b.last().unwrap();
    while r.len() >= b.len() && !(r.len() == 1 && r[0].is_zero()) {
        let k = r.len() - b.len();
        let f = r.last().unwrap() / lead;
        for (i, c) in b.iter().enumerate() {
            r[i + k] = &r[i + k] - &(&f * c);
        }
        r.pop();
        r = trim(r);
    }
    r
}

fn sign_changes(signs: impl Iterator<Item = Ordering>) -> usize {
    let mut last = Ordering::Equal;
    let mut count = 0;
    for s in signs.filter(|s| *s != Ordering::Equal) {
        if last != Ordering::Equal && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// Number of distinct real roots, by a Sturm sequence.
fn sturm_count(p: &[Rat]) -> usize {
    let deriv: Vec<Rat> = p.iter().enumerate().skip(1).map(|(i, c)| c * &Rat::int(i as i64)).collect();
    let mut seq = vec![p.to_vec(), trim(deriv)];
    loop {
        let n = seq.len();
        let last = &seq[n - 1];
        if last.len() == 1 {
            break;
        }
        let r = poly_rem(&seq[n - 2], last);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
        seq.push(r.into_iter().map(|c| -c).collect());
    }
    let at_pos = seq.iter().map(|q| q.last().unwrap().signum());
    let at_neg = seq.iter().map(|q| {
        let s = q.last().unwrap().signum();
        if (q.len() - 1) % 2 == 1 {
            s.reverse()
        } else {
            s
        }
    });
    sign_changes(at_neg).saturating_sub(sign_changes(at_pos))
}

/// Relative tolerance for a float polynomial value to count as zero.
const FLOAT_ROOT_TOL: f64 = 1e-9;

impl RootField for f64 {
    fn real_roots(coeffs: &[f64]) -> Result<Vec<(f64, u32)>, NewtonError> {
        let lead = *coeffs.last().unwrap();
        let p: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
        Ok(float_roots(&p).into_iter().filter(|(r, _)| *r != 0.0).collect())
    }

    fn approx(&self) -> f64 {
        *self
    }
}

fn horner(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn scale_at(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x.abs() + c.abs())
}

/// Real roots of a monic float polynomial with multiplicities. Critical
/// points split the line into monotone pieces; a critical point where the
/// polynomial vanishes is a multiple root.
fn float_roots(p: &[f64]) -> Vec<(f64, u32)> {
    let d = p.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    if d == 1 {
        return vec![(-p[0] / p[1], 1)];
    }
    let deriv: Vec<f64> = p.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
    let dl = *deriv.last().unwrap();
    let crit = float_roots(&deriv.iter().map(|c| c / dl).collect::<Vec<_>>());
    let bound = 1.0 + p[..d].iter().map(|c| (c / p[d]).abs()).fold(0.0, f64::max);
    let mut out = Vec::new();
    let mut marks = vec![-bound];
    for (c, m) in &crit {
        if horner(p, *c).abs() <= FLOAT_ROOT_TOL * scale_at(p, *c).max(1.0) {
            out.push((*c, m + 1));
        }
        marks.push(*c);
    }
    marks.push(bound);
    for w in marks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (horner(p, a), horner(p, b));
        let near_zero = |x: f64, fx: f64| fx.abs() <= FLOAT_ROOT_TOL * scale_at(p, x).max(1.0);
        if near_zero(a, fa) || near_zero(b, fb) || fa.signum() == fb.signum() {
            continue;
        }
        out.push((bisect(p, a, b, fa), 1));
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

fn bisect(p: &[f64], mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = horner(p, m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|n| Rat::int(*n)).collect()
    }

    #[test]
    fn rational_roots_with_multiplicity() {
        // (z - 1)^2 (2z + 3) = 2z^3 - z^2 - 4z + 3
        let r = Rat::real_roots(&q(&[3, -4, -1, 2])).unwrap();
        assert_eq!(r, vec![(Rat::frac(-3, 2), 1), (Rat::one(), 2)]);
        // z^2 + 1 has no real roots.
        assert_eq!(Rat::real_roots(&q(&[1, 0, 1])).unwrap(), vec![]);
        // z^3 - 1: one real root.
        assert_eq!(Rat::real_roots(&q(&[-1, 0, 0, 1])).unwrap(), vec![(Rat::one(), 1)]);
    }

    #[test]
    fn irrational_roots_are_reported() {
        assert_eq!(Rat::real_roots(&q(&[-2, 0, 1])), Err(NewtonError::IrrationalBranch));
        // (z - 1)(z^2 - 3)
        assert_eq!(Rat::real_roots(&q(&[3, -3, -1, 1])), Err(NewtonError::IrrationalBranch));
    }

    #[test]
    fn sturm_counts() {
        assert_eq!(sturm_count(&q(&[-2, 0, 1])), 2);
        assert_eq!(sturm_count(&q(&[1, 0, 1])), 0);
        assert_eq!(sturm_count(&q(&[0, -1, 0, 1])), 3);
        assert_eq!(sturm_count(&q(&[1, -2, 1])), 1);
    }

    #[test]
    fn float_roots_and_multiplicity() {
        let r = f64::real_roots(&[-2.0, 0.0, 1.0]).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[1].0 - 2f64.sqrt()).abs() < 1e-12);
        let r = f64::real_roots(&[1.0, -2.0, 1.0]).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].1, 2);
        assert!((r[0].0 - 1.0).abs() < 1e-6);
        assert!(f64::real_roots(&[1.0, 0.0, 1.0]).unwrap().is_empty());
    }
}
