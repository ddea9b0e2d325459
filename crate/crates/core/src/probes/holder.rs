use serde::Serialize;

use super::sampler::{pair_for_trial, SamplerSpec};
use super::{image, image_dist, is_irrational, run_trials, tadic_ord_dist, Mode, ProbeError, ProbeOptions};
use crate::puiseux::{Coeff, Valuation};
use crate::qarith::{Exp, Rat};
use crate::transport::{MapExpr, TransportError};

/// Largest denominator of a fitted exponent.
pub const MAX_ALPHA_DEN: i64 = 24;

/// Exponent `alpha` with `ord(h o a - h o b) >= alpha ord(a - b) + offset`
/// on every used pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderEstimate {
    pub alpha: Rat,
    pub constant_offset: Rat,
    pub sample_count: usize,
    /// Pairs dropped because a guard failed along an arc.
    pub discarded: usize,
    /// Pairs whose image distance is beyond the expansion order.
    pub undecided: usize,
    /// Used pairs violating the fitted inequality.
    pub violations: usize,
    pub worst_pair: Option<[String; 2]>,
    pub mode: Mode,
}

enum Outcome {
    Used { d: Exp, e: Exp, pair: [String; 2] },
    Discarded,
    Undecided,
}

fn pair_outcome<C: Coeff>(
    h: &MapExpr,
    spec: &SamplerSpec,
    seed: u64,
    i: usize,
    tolerance: f64,
) -> Result<Outcome, TransportError> {
    let (a, b) = pair_for_trial(spec, h.input_dim(), seed, i);
    let d = match tadic_ord_dist(&a, &b).expect("same dimension") {
        Valuation::Order(d) => d,
        _ => return Ok(Outcome::Undecided),
    };
    let images = image::<C>(h, &a, spec.order).and_then(|x| Ok((x, image::<C>(h, &b, spec.order)?)));
    let (ha, hb) = match images {
        Ok(v) => v,
        Err(TransportError::GuardViolation(_) | TransportError::ZeroDivision) => return Ok(Outcome::Discarded),
        Err(e) => return Err(e),
    };
    match image_dist(&ha, &hb, tolerance) {
        Valuation::Order(e) => Ok(Outcome::Used { d, e, pair: [a.to_string(), b.to_string()] }),
        _ => Ok(Outcome::Undecided),
    }
}

/// Largest `p/q <= min(bound, 1)` with `q <= MAX_ALPHA_DEN`.
fn best_rational_below(bound: Exp) -> Exp {
    if bound >= Exp::ONE {
        return Exp::ONE;
    }
    (1..=MAX_ALPHA_DEN).map(|q| Exp::new((bound * Exp::int(q)).floor(), q)).max().unwrap()
}

fn run<C: Coeff>(
    h: &MapExpr,
    spec: &SamplerSpec,
    trials: usize,
    seed: u64,
    opts: &ProbeOptions,
    mode: Mode,
) -> Result<HolderEstimate, ProbeError> {
    let outcomes = run_trials(opts.exec, trials, |i| pair_outcome::<C>(h, spec, seed, i, opts.tolerance))?;
    let mut used = Vec::new();
    let (mut discarded, mut undecided) = (0, 0);
    for o in outcomes {
        match o {
            Outcome::Used { d, e, pair } => used.push((d, e, pair)),
            Outcome::Discarded => discarded += 1,
            Outcome::Undecided => undecided += 1,
        }
    }
    let (worst, ratio) = used
        .iter()
        .enumerate()
        .map(|(k, (d, e, _))| (k, *e / *d))
        .min_by(|x, y| x.1.cmp(&y.1).then(x.0.cmp(&y.0)))
        .ok_or(ProbeError::DegenerateData)?;
    let alpha = best_rational_below(ratio);
    let offset = used.iter().map(|(d, e, _)| *e - alpha * *d).min().unwrap();
    let violations = used.iter().filter(|(d, e, _)| *e < alpha * *d + offset).count();
    Ok(HolderEstimate {
        alpha: Rat::from(alpha),
        constant_offset: Rat::from(offset),
        sample_count: used.len(),
        discarded,
        undecided,
        violations,
        worst_pair: Some(used[worst].2.clone()),
        mode,
    })
}

/// Fits the Hölder exponent of `h` along `trials` sampled pairs of arcs.
/// The fitted `alpha` is the largest admissible rational not above the
/// smallest observed ratio of image order to source order.
pub fn holder_probe(
    h: &MapExpr,
    spec: &SamplerSpec,
    trials: usize,
    seed: u64,
    opts: &ProbeOptions,
) -> Result<HolderEstimate, ProbeError> {
    if opts.mode == Mode::Exact {
        match run::<Rat>(h, spec, trials, seed, opts, Mode::Exact) {
            Err(ProbeError::Transport(e)) if is_irrational(&e) => {
                log::debug!("holder probe: irrational coefficient, rerunning in numeric mode");
            }
            other => return other,
        }
    }
    run::<f64>(h, spec, trials, seed, opts, Mode::Numeric)
}
