//! The `t`-adic and product topologies on arc spaces, and sampled probes
//! of continuity moduli: Hölder exponents along arcs, Łojasiewicz power
//! laws, uniform continuity on boxes, and transfer of injectivity,
//! surjectivity and limits from maps to their arc maps.

mod holder;
mod loja;
mod modulus;
pub mod sampler;
mod transfer;

use std::sync::atomic::{AtomicBool, Ordering};

use serde::Serialize;
use thiserror::Error;

pub use holder::{holder_probe, HolderEstimate};
pub use loja::{loja_fit, BoxSpec, LojaFit};
pub use modulus::{uniform_modulus_probe, ModulusEstimate};
pub use sampler::SamplerSpec;
pub use transfer::{transfer_check, TransferKind, TransferReport, TransferWitness};

use crate::par::Exec;
use crate::param::{divergence_witness, limit_eps0, DivergenceWitness, ParamSeries};
use crate::puiseux::{Arc, Coeff, PuiseuxSeries, Series, SeriesError, Valuation};
use crate::transport::{eval_map_on_arc, MapExpr, TransportError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbeError {
    #[error("arcs have dimensions {0} and {1}")]
    DimensionMismatch(usize, usize),
    #[error("no usable samples")]
    DegenerateData,
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// Coefficient arithmetic of a probe run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOptions {
    /// Requested mode. An exact run that meets an irrational coefficient
    /// is redone entirely in numeric mode.
    pub mode: Mode,
    /// Numeric mode: coefficients below this fraction of the largest one
    /// in a difference are treated as cancelled.
    pub tolerance: f64,
    pub exec: Exec,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { mode: Mode::Exact, tolerance: 1e-9, exec: Exec::Parallel }
    }
}

/// `t`-adic closeness of two arcs: the least order of the componentwise
/// differences. Larger is closer; `Valuation::Zero` means equal.
pub fn tadic_ord_dist<C: Coeff>(a: &Arc<C>, b: &Arc<C>) -> Result<Valuation, ProbeError> {
    if a.dim() != b.dim() {
        return Err(ProbeError::DimensionMismatch(a.dim(), b.dim()));
    }
    let vals = a.components().iter().zip(b.components()).map(|(x, y)| (x - y).valuation());
    Ok(min_valuation(vals))
}

pub(crate) fn min_valuation(vals: impl Iterator<Item = Valuation>) -> Valuation {
    let vals: Vec<Valuation> = vals.collect();
    let lb = vals.iter().map(|v| v.lower_bound()).min();
    match lb {
        None | Some(crate::qarith::Bound::Infinite) => Valuation::Zero,
        Some(crate::qarith::Bound::Finite(m)) => {
            if vals.contains(&Valuation::Order(m)) {
                Valuation::Order(m)
            } else {
                Valuation::ZeroUpToTruncation(m)
            }
        }
    }
}

/// Behaviour of a family of arcs as `eps -> 0` in the product topology.
#[derive(Debug, Clone, PartialEq)]
pub enum ProductLimit {
    Converges(Vec<PuiseuxSeries>),
    Diverges(DivergenceWitness),
}

pub fn product_topology_limit(family: &[ParamSeries]) -> ProductLimit {
    let mut limit = Vec::with_capacity(family.len());
    for p in family {
        if let Some(w) = divergence_witness(p) {
            return ProductLimit::Diverges(w);
        }
        limit.push(limit_eps0(p).expect("no divergence witness"));
    }
    ProductLimit::Converges(limit)
}

pub(crate) fn is_irrational(e: &TransportError) -> bool {
    matches!(e, TransportError::Series(SeriesError::IrrationalLeadingRoot))
}

/// Runs `f` on every trial index. The first error stops trials that have
/// not started yet; an irrational coefficient takes precedence over other
/// errors so that exact runs can fall back to numeric mode.
pub(crate) fn run_trials<T, F>(exec: Exec, trials: usize, f: F) -> Result<Vec<T>, TransportError>
where
    T: Send,
    F: Fn(usize) -> Result<T, TransportError> + Sync + Send,
{
    let stop = AtomicBool::new(false);
    let out = crate::par::map_range(exec, 0..trials, |i| {
        if stop.load(Ordering::Relaxed) {
            return None;
        }
        let r = f(i);
        if r.is_err() {
            stop.store(true, Ordering::Relaxed);
        }
        Some(r)
    });
    let errors: Vec<&TransportError> = out.iter().flatten().filter_map(|r| r.as_ref().err()).collect();
    if let Some(e) = errors.iter().find(|e| is_irrational(e)).or(errors.first()) {
        return Err((*e).clone());
    }
    Ok(out.into_iter().flatten().map(|r| r.expect("no errors")).collect())
}

/// Pushforward in the coefficient type `C` of an exact arc.
pub(crate) fn image<C: Coeff>(h: &MapExpr, c: &Arc, order: crate::qarith::Exp) -> Result<Arc<C>, TransportError> {
    eval_map_on_arc(h, &c.map_coeffs(C::from_rat), order)
}

/// Distance of two images. In numeric mode, coefficients of a difference
/// below `tolerance` times the largest input coefficient are dropped.
pub(crate) fn image_dist<C: Coeff>(a: &Arc<C>, b: &Arc<C>, tolerance: f64) -> Valuation {
    let vals = a.components().iter().zip(b.components()).map(|(x, y)| {
        let d = x - y;
        if C::EXACT {
            return d.valuation();
        }
        let scale = x.terms().iter().chain(y.terms()).map(|(_, c)| c.magnitude()).fold(0.0, f64::max);
        let kept: Vec<_> = d.terms().iter().filter(|(_, c)| c.magnitude() > tolerance * scale).cloned().collect();
        Series::from_terms(kept, d.trunc()).valuation()
    });
    min_valuation(vals)
}
