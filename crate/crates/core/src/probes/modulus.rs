use serde::Serialize;

use super::{BoxSpec, ProbeError};
use crate::par::{self, Exec};
use crate::transport::{eval_map_point, MapExpr};

/// Grid estimate of `r = inf_x g(x)`, where `g(x)` is the largest
/// `s <= 1` such that `|x - a| < s` forces `|h(x) - h(a)| < epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub r: f64,
    pub worst_point: Vec<f64>,
    pub grid_points: usize,
}

const MAX_OFFSETS: usize = 20_000_000;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Integer offsets of Euclidean length at most `1/step` grid units,
/// nearest first.
fn offsets(dim: usize, step: f64) -> Result<Vec<(f64, Vec<i64>)>, ProbeError> {
    let reach = (1.0 / step).ceil() as i64;
    let side = (2 * reach + 1) as usize;
    if side.checked_pow(dim as u32).is_none_or(|n| n > MAX_OFFSETS) {
        return Err(ProbeError::InvalidConfig("grid step too small for this dimension".into()));
    }
    let mut out = vec![(0.0, Vec::new())];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|(_, v)| {
                (-reach..=reach).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    (0.0, w)
                })
            })
            .collect();
    }
    let mut out: Vec<(f64, Vec<i64>)> = out
        .into_iter()
        .map(|(_, v)| (norm(&v.iter().map(|k| *k as f64 * step).collect::<Vec<_>>()), v))
        .filter(|(d, v)| *d <= 1.0 && v.iter().any(|k| *k != 0))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    Ok(out)
}

pub fn uniform_modulus_probe(
    h: &MapExpr,
    domain: &BoxSpec,
    epsilon: f64,
    step: f64,
    exec: Exec,
) -> Result<ModulusEstimate, ProbeError> {
    if !(epsilon > 0.0 && step > 0.0) {
        return Err(ProbeError::InvalidConfig("epsilon and step must be positive".into()));
    }
    if h.input_dim() > domain.dim() {
        return Err(ProbeError::InvalidConfig("map has more inputs than the box".into()));
    }
    let counts: Vec<usize> = domain.bounds.iter().map(|(lo, hi)| ((hi - lo) / step).round() as usize + 1).collect();
    let total: usize = counts.iter().product();
    let index = |mut flat: usize| -> Vec<usize> {
        counts
            .iter()
            .map(|n| {
                let i = flat % n;
                flat /= n;
                i
            })
            .collect()
    };
    let coord = |idx: &[usize]| -> Vec<f64> {
        idx.iter().zip(&domain.bounds).map(|(i, (lo, _))| lo + *i as f64 * step).collect()
    };
    let values = par::map_range(exec, 0..total, |k| eval_map_point(h, &coord(&index(k))[..h.input_dim()]));
    let values: Vec<Vec<f64>> = values.into_iter().collect::<Result<_, _>>()?;
    let offs = offsets(domain.dim(), step)?;
    let g = |k: usize| -> (f64, usize) {
        let idx = index(k);
        for (dist, off) in &offs {
            let mut flat = 0;
            let mut stride = 1;
            let mut inside = true;
            for ((i, o), n) in idx.iter().zip(off).zip(&counts) {
                let j = *i as i64 + o;
                if j < 0 || j >= *n as i64 {
                    inside = false;
                    break;
                }
                flat += j as usize * stride;
                stride *= n;
            }
            if !inside {
                continue;
            }
            let gap: f64 = values[k].iter().zip(&values[flat]).map(|(a, b)| (a - b) * (a - b)).sum();
            if gap.sqrt() >= epsilon {
                return (*dist, k);
            }
        }
        (1.0, k)
    };
    let (r, worst) =
        par::map_reduce(
            exec,
            0..total,
            g,
            (f64::INFINITY, usize::MAX),
            |a, b| {
                if (b.0, b.1) < (a.0, a.1) {
                    b
                } else {
                    a
                }
            },
        );
    Ok(ModulusEstimate { r, worst_point: coord(&index(worst)), grid_points: total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_map;

    fn probe(h: &str, hi: f64, step: f64) -> ModulusEstimate {
        let b = BoxSpec::new(vec![(0.0, hi)]).unwrap();
        uniform_modulus_probe(&parse_map(h).unwrap(), &b, 0.1, step, Exec::Parallel).unwrap()
    }

    #[test]
    fn one_dimensional_examples() {
        let r = probe("x", 1.0, 0.001).r;
        assert!((r - 0.1).abs() <= 0.0011, "{r}");
        let m = probe("x^2", 1.0, 0.001);
        assert!((m.r - 0.0513).abs() <= 0.0011, "{}", m.r);
        let r = probe("x^2", 10.0, 0.001).r;
        assert!((r - 0.005).abs() <= 0.0011, "{r}");
    }

    #[test]
    fn two_dimensional_grid() {
        let b = BoxSpec::new(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let h = parse_map("(x + y)").unwrap();
        let m = uniform_modulus_probe(&h, &b, 0.2, 0.05, Exec::Sequential).unwrap();
        // Along the diagonal the map grows at rate sqrt 2.
        assert!((m.r - 0.2 / 2f64.sqrt()).abs() <= 0.05, "{}", m.r);
    }
}
