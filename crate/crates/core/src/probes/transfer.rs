use serde::Serialize;

use super::sampler::{arc_for_trial, pair_for_trial, sample_arc_with_constants, trial_rng, SamplerSpec};
use super::{image, image_dist, is_irrational, run_trials, Mode, ProbeError, ProbeOptions};
use crate::puiseux::{Arc, Coeff, Limit, Valuation};
use crate::qarith::Rat;
use crate::transport::{eval_map_on_arc, solve_preimage_arc, MapExpr, TransportError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferKind {
    Injective,
    Surjective,
    LimitAdditive,
}

/// Arcs exhibiting a failure of the transferred property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferWitness {
    pub trial: usize,
    pub arcs: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    pub kind: TransferKind,
    pub trials: usize,
    pub checked: usize,
    pub discarded: usize,
    pub witness: Option<TransferWitness>,
    /// First certified preimage, for surjectivity checks.
    pub example: Option<[String; 2]>,
    pub mode: Mode,
}

enum Outcome {
    Pass(Option<[String; 2]>),
    Discarded,
    Fail(TransferWitness),
}

fn guard_to_discard(r: Result<Outcome, TransportError>) -> Result<Outcome, TransportError> {
    match r {
        Err(TransportError::GuardViolation(_) | TransportError::ZeroDivision) => Ok(Outcome::Discarded),
        other => other,
    }
}

fn injective<C: Coeff>(
    h: &MapExpr,
    spec: &SamplerSpec,
    seed: u64,
    i: usize,
    tol: f64,
) -> Result<Outcome, TransportError> {
    let (a, b) = pair_for_trial(spec, h.input_dim(), seed, i);
    if a == b {
        return Ok(Outcome::Discarded);
    }
    let (ha, hb) = (image::<C>(h, &a, spec.order)?, image::<C>(h, &b, spec.order)?);
    Ok(match image_dist(&ha, &hb, tol) {
        Valuation::Order(_) => Outcome::Pass(None),
        v => Outcome::Fail(TransferWitness {
            trial: i,
            arcs: vec![a.to_string(), b.to_string()],
            detail: match v {
                Valuation::Zero => "images are equal".into(),
                _ => format!("images agree up to t^{}", v.lower_bound()),
            },
        }),
    })
}

fn surjective(h: &MapExpr, spec: &SamplerSpec, seed: u64, i: usize) -> Result<Outcome, TransportError> {
    let src = arc_for_trial(spec, h.input_dim(), seed, i);
    let gamma = eval_map_on_arc(h, &src, spec.order)?;
    match solve_preimage_arc(h, &gamma, spec.order) {
        Ok(pre) => Ok(Outcome::Pass(Some([gamma.to_string(), pre.to_string()]))),
        Err(TransportError::NoRealBranch) => Ok(Outcome::Fail(TransferWitness {
            trial: i,
            arcs: vec![gamma.to_string()],
            detail: "no preimage arc found".into(),
        })),
        Err(e) => Err(e),
    }
}

fn limit_additive<C: Coeff>(
    h: &MapExpr,
    spec: &SamplerSpec,
    seed: u64,
    i: usize,
    tol: f64,
) -> Result<Outcome, TransportError> {
    let mut rng = trial_rng(seed, i);
    let a = sample_arc_with_constants(&mut rng, spec, h.input_dim());
    let b = sample_arc_with_constants(&mut rng, spec, h.input_dim());
    let (ha, hb) = (image::<C>(h, &a, spec.order)?, image::<C>(h, &b, spec.order)?);
    let sum = Arc::new(ha.components().iter().zip(hb.components()).map(|(x, y)| x + y).collect());
    for ((la, lb), ls) in ha.limit0().into_iter().zip(hb.limit0()).zip(sum.limit0()) {
        let (Limit::Value(x), Limit::Value(y), Limit::Value(s)) = (la, lb, ls) else { continue };
        let expected = x.add(&y);
        let agree =
            if C::EXACT { expected == s } else { expected.sub(&s).magnitude() <= tol * (1.0 + expected.magnitude()) };
        if !agree {
            return Ok(Outcome::Fail(TransferWitness {
                trial: i,
                arcs: vec![ha.to_string(), hb.to_string()],
                detail: format!("limit of the sum is {}, sum of limits {}", s.render(), expected.render()),
            }));
        }
    }
    Ok(Outcome::Pass(None))
}

fn run<C: Coeff>(
    kind: TransferKind,
    h: &MapExpr,
    spec: &SamplerSpec,
    trials: usize,
    seed: u64,
    opts: &ProbeOptions,
    mode: Mode,
) -> Result<TransferReport, ProbeError> {
    let tol = opts.tolerance;
    let outcomes = run_trials(opts.exec, trials, |i| {
        guard_to_discard(match kind {
            TransferKind::Injective => injective::<C>(h, spec, seed, i, tol),
            TransferKind::Surjective => surjective(h, spec, seed, i),
            TransferKind::LimitAdditive => limit_additive::<C>(h, spec, seed, i, tol),
        })
    })?;
    let mut report = TransferReport { kind, trials, checked: 0, discarded: 0, witness: None, example: None, mode };
    for o in outcomes {
        match o {
            Outcome::Pass(ex) => {
                report.checked += 1;
                if report.example.is_none() {
                    report.example = ex;
                }
            }
            Outcome::Discarded => report.discarded += 1,
            Outcome::Fail(w) => {
                report.checked += 1;
                if report.witness.is_none() {
                    report.witness = Some(w);
                }
            }
        }
    }
    Ok(report)
}

/// Samples arcs and checks that `h` transfers the property to its arc map.
/// Surjectivity samples arcs in the image of `h` and solves for preimages,
/// always in exact mode.
pub fn transfer_check(
    kind: TransferKind,
    h: &MapExpr,
    spec: &SamplerSpec,
    trials: usize,
    seed: u64,
    opts: &ProbeOptions,
) -> Result<TransferReport, ProbeError> {
    if opts.mode == Mode::Exact || kind == TransferKind::Surjective {
        match run::<Rat>(kind, h, spec, trials, seed, opts, Mode::Exact) {
            Err(ProbeError::Transport(e)) if is_irrational(&e) && kind != TransferKind::Surjective => {
                log::debug!("transfer check: irrational coefficient, rerunning in numeric mode");
            }
            other => return other,
        }
    }
    run::<f64>(kind, h, spec, trials, seed, opts, Mode::Numeric)
}
