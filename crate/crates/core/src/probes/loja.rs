use rand::Rng;
use serde::Serialize;

use super::sampler::trial_rng;
use super::ProbeError;
use crate::par::{self, Exec};
use crate::transport::{eval_point, MapExpr};

/// An axis-aligned box `prod [lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxSpec {
    pub bounds: Vec<(f64, f64)>,
}

impl BoxSpec {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self, ProbeError> {
        if bounds.is_empty() || bounds.iter().any(|(lo, hi)| !lo.is_finite() || !hi.is_finite() || lo > hi) {
            return Err(ProbeError::InvalidConfig("box bounds must be finite with lo <= hi".into()));
        }
        Ok(BoxSpec { bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.bounds.iter().map(|&(lo, hi)| if lo == hi { lo } else { rng.gen_range(lo..=hi) }).collect()
    }
}

/// Power law `phi2 >= c phi1^r - max_violation`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LojaFit {
    pub c: f64,
    pub r: f64,
    /// Largest `c phi1^r - phi2` over the fitting samples.
    pub max_violation: f64,
    /// The same over a fresh sample set.
    pub validation_violation: f64,
    pub samples: usize,
    pub tolerance: f64,
}

// Validation samples come from an independent stream.
const VALIDATION_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

fn values(f1: &MapExpr, f2: &MapExpr, pts: &[Vec<f64>], exec: Exec) -> Result<Vec<(f64, f64)>, ProbeError> {
    let vals = par::map_collect(exec, pts, |p| -> Result<(f64, f64), ProbeError> {
        Ok((eval_point(&f1.outputs[0], p)?, eval_point(&f2.outputs[0], p)?))
    });
    let vals: Vec<(f64, f64)> = vals.into_iter().collect::<Result<_, _>>()?;
    for (a, b) in &vals {
        if *a < 0.0 || *b < 0.0 {
            return Err(ProbeError::AssumptionViolated("functions must be nonnegative".into()));
        }
        if *b == 0.0 && *a > 0.0 {
            return Err(ProbeError::AssumptionViolated("phi2 vanishes where phi1 does not".into()));
        }
    }
    Ok(vals)
}

fn points(domain: &BoxSpec, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..samples).map(|i| domain.sample(&mut trial_rng(seed, i))).collect()
}

fn violation(vals: &[(f64, f64)], c: f64, r: f64) -> f64 {
    vals.iter().filter(|(a, _)| *a > 0.0).map(|(a, b)| c * a.powf(r) - b).fold(0.0, f64::max)
}

/// Least-squares fit of `log phi2 = log c + r log phi1` on samples with
/// `phi1 > 0`, then `c` lowered until every sample violates the bound by
/// at most `tolerance`.
pub fn loja_fit(
    phi1: &MapExpr,
    phi2: &MapExpr,
    domain: &BoxSpec,
    samples: usize,
    seed: u64,
    tolerance: f64,
    exec: Exec,
) -> Result<LojaFit, ProbeError> {
    for f in [phi1, phi2] {
        if f.output_dim() != 1 || f.input_dim() > domain.dim() {
            return Err(ProbeError::InvalidConfig("functions must be scalar on the box".into()));
        }
    }
    let vals = values(phi1, phi2, &points(domain, samples, seed), exec)?;
    let logs: Vec<(f64, f64)> = vals.iter().filter(|(a, _)| *a > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if logs.len() < 2 {
        return Err(ProbeError::DegenerateData);
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(ProbeError::DegenerateData);
    }
    let r = sxy / sxx;
    let mut c = (my - r * mx).exp();
    if violation(&vals, c, r) > tolerance {
        c = vals.iter().filter(|(a, _)| *a > 0.0).map(|(a, b)| (b + tolerance) / a.powf(r)).fold(c, f64::min);
    }
    let fresh = values(phi1, phi2, &points(domain, samples, seed ^ VALIDATION_SALT), exec)?;
    Ok(LojaFit {
        c,
        r,
        max_violation: violation(&vals, c, r),
        validation_violation: violation(&fresh, c, r),
        samples: logs.len(),
        tolerance,
    })
}
