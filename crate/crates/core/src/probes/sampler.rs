//! Seeded random arcs: Puiseux polynomials with small rational exponents
//! and coefficients. Trial `i` draws from a generator seeded with
//! `seed ^ i`, so trials are independent of evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::puiseux::{Arc, PuiseuxSeries, Series};
use crate::qarith::{Bound, Exp, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplerSpec {
    /// Exponents are `k/q` with `1 <= k <= max_exp_num`.
    pub max_exp_num: i64,
    /// and `1 <= q <= max_exp_den`.
    pub max_exp_den: i64,
    /// Coefficients are `a/b` with `0 < |a| <= height`, `1 <= b <= height`.
    pub height: i64,
    pub max_terms: usize,
    /// Order at which images along sampled arcs are expanded.
    pub order: Exp,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        SamplerSpec { max_exp_num: 8, max_exp_den: 4, height: 10, max_terms: 3, order: Exp::int(16) }
    }
}

pub fn trial_rng(seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ i as u64)
}

fn coeff(rng: &mut impl Rng, height: i64) -> Rat {
    let mut a = rng.gen_range(-height..height);
    if a >= 0 {
        a += 1;
    }
    Rat::frac(a, rng.gen_range(1..=height))
}

fn exponent(rng: &mut impl Rng, spec: &SamplerSpec) -> Exp {
    Exp::new(rng.gen_range(1..=spec.max_exp_num), rng.gen_range(1..=spec.max_exp_den))
}

/// A random nonzero series with positive exponents.
pub fn sample_series(rng: &mut impl Rng, spec: &SamplerSpec) -> PuiseuxSeries {
    loop {
        let n = rng.gen_range(1..=spec.max_terms.max(1));
        let terms: Vec<(Exp, Rat)> = (0..n).map(|_| (exponent(rng, spec), coeff(rng, spec.height))).collect();
        let s = Series::from_terms(terms, Bound::Infinite);
        if !s.is_exact_zero() {
            return s;
        }
    }
}

/// A random arc based at the origin.
pub fn sample_arc(rng: &mut impl Rng, spec: &SamplerSpec, dim: usize) -> Arc {
    Arc::new((0..dim).map(|_| sample_series(rng, spec)).collect())
}

/// A random arc whose components have random constant terms.
pub fn sample_arc_with_constants(rng: &mut impl Rng, spec: &SamplerSpec, dim: usize) -> Arc {
    let arc = sample_arc(rng, spec, dim);
    Arc::new(arc.into_components().into_iter().map(|s| s + Series::constant(coeff(rng, spec.height))).collect())
}

fn diagonal(dim: usize, s: &str) -> Arc {
    Arc::new(vec![crate::parser::parse_series(s).expect("valid literal"); dim])
}

/// Fixed arcs tried before the random ones.
pub fn canonical_arcs(dim: usize) -> Vec<Arc> {
    let staircase = Arc::new((0..dim).map(|i| Series::monomial(Rat::one(), Exp::int(i as i64 + 1))).collect());
    vec![diagonal(dim, "t"), diagonal(dim, "-t"), staircase]
}

/// Fixed pairs tried before the random ones; `(t, -t)` comes first.
pub fn canonical_pairs(dim: usize) -> Vec<(Arc, Arc)> {
    vec![
        (diagonal(dim, "t"), diagonal(dim, "-t")),
        (diagonal(dim, "t"), diagonal(dim, "t + t^2")),
        (diagonal(dim, "t^2"), diagonal(dim, "t^2 + t^(7/3)")),
    ]
}

/// Arc for trial `i`: the canonical arcs, then random ones.
pub fn arc_for_trial(spec: &SamplerSpec, dim: usize, seed: u64, i: usize) -> Arc {
    let canon = canonical_arcs(dim);
    if i < canon.len() {
        return canon[i].clone();
    }
    sample_arc(&mut trial_rng(seed, i), spec, dim)
}

/// Pair for trial `i`: the canonical pairs, then random ones. Random
/// pairs are either independent or a perturbation of the first arc by
/// terms of higher order, so that their distance varies.
pub fn pair_for_trial(spec: &SamplerSpec, dim: usize, seed: u64, i: usize) -> (Arc, Arc) {
    let canon = canonical_pairs(dim);
    if i < canon.len() {
        return canon[i].clone();
    }
    let mut rng = trial_rng(seed, i);
    let a = sample_arc(&mut rng, spec, dim);
    let b = if rng.gen_bool(0.5) {
        sample_arc(&mut rng, spec, dim)
    } else {
        let shift = exponent(&mut rng, spec);
        let parts = a.components().iter().map(|c| c + &sample_series(&mut rng, spec).shift(shift)).collect();
        Arc::new(parts)
    };
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_based_at_origin() {
        let spec = SamplerSpec::default();
        for i in 0..50 {
            let (a, b) = pair_for_trial(&spec, 2, 7, i);
            assert_eq!((a.clone(), b.clone()), pair_for_trial(&spec, 2, 7, i));
            assert!(a.is_based_at_origin() && b.is_based_at_origin());
        }
        assert_ne!(pair_for_trial(&spec, 1, 0, 10), pair_for_trial(&spec, 1, 1, 10));
        let (a, b) = pair_for_trial(&spec, 1, 0, 0);
        assert_eq!(format!("{a} | {b}"), "(t) | (-t)");
    }
}
