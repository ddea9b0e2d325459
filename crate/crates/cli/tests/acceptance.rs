//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;
use serde_json::Value;

use arcspace::newton::{np_roots, rc_witness_odd, PolyOverSeries, RootBranch};
use arcspace::par::Exec;
use arcspace::parser::{
    parse_arc, parse_map, parse_map_with_vars, parse_poly, parse_series, render_map, render_series,
};
use arcspace::probes::sampler::{sample_series, trial_rng};
use arcspace::probes::{
    holder_probe, loja_fit, product_topology_limit, transfer_check, BoxSpec, ProbeOptions, ProductLimit, SamplerSpec,
    TransferKind,
};
use arcspace::puiseux::{Arc, PuiseuxSeries, Series, Valuation};
use arcspace::qarith::{Bound, Exp, Rat};
use arcspace::transport::{
    counterexample_pushforward, eval_map_on_arc, eval_map_point, family_arc, jacobian_check, monotone_bound_check,
    phi_chart_maps, phi_map, phi_product_residual, solve_preimage_arc, Expr, GridSpec, MapExpr,
};

// Pinned tolerances.
const C1_ORACLE_REL: f64 = 1e-6;
const C1_BUDGET: Duration = Duration::from_secs(1);
const C3_MONOTONE_MAX: f64 = 0.25;
const C3_CLOSED_FORM_TOL: f64 = 1e-3;
const C3_JACOBIAN_TOL: f64 = 1e-12;
const C3_FINITE_DIFF_TOL: f64 = 1e-6;
const C5_BUDGET: Duration = Duration::from_secs(5);
const C7_PHI_PAIRS: usize = 100;
const C8_REL: f64 = 0.05;
const C8_VIOLATION: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli(args: &[&str]) -> (i32, Value, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_arcspace")).args(args).output().expect("binary runs");
    let took = start.elapsed();
    let json = serde_json::from_slice(&out.stdout).expect("json report");
    (out.status.code().unwrap_or(-1), json, took)
}

/// Coefficient of `t^3` in the first component of `phi(eps t, t^2)`, by
/// floating-point evaluation and extrapolation in `t^2` to zero.
fn t3_coefficient(eps: f64) -> f64 {
    let g = |t: f64| {
        let (x, y) = (eps * t, t * t);
        let w = y * y / (x * x + y * y);
        // x (1+w)^(1/4) - x, without cancellation.
        x * (0.25 * w.ln_1p()).exp_m1() / (t * t * t)
    };
    let ts = [1e-2 * eps, 2e-2 * eps, 3e-2 * eps];
    let s: Vec<f64> = ts.iter().map(|t| t * t).collect();
    let v: Vec<f64> = ts.iter().map(|t| g(*t)).collect();
    // Lagrange interpolation at s = 0.
    (0..3)
        .map(|i| {
            let w: f64 = (0..3).filter(|j| *j != i).map(|j| s[j] / (s[j] - s[i])).product();
            w * v[i]
        })
        .sum()
}

fn c1() -> Outcome {
    let (code, report, took) = cli(&["counterexample", "--t-order", "8", "--emit", "json"]);
    ensure(code == 2, || format!("exit code {code}"))?;
    let r = &report["result"];
    let first = r["pushforward"][0].as_str().unwrap_or_default();
    let want = "eps*t + 1/4*eps^(-1)*t^3 - 11/32*eps^(-3)*t^5";
    ensure(first.starts_with(want), || format!("first component {first}"))?;
    ensure(r["pushforward"][1] == "t^2", || format!("second component {}", r["pushforward"][1]))?;
    let w = &r["divergence_witness"];
    ensure(w["t_exp"] == "3" && w["eps_exp"] == -1 && w["coeff"] == "1/4", || format!("witness {w}"))?;
    ensure(took <= C1_BUDGET, || format!("runtime {took:?}"))?;

    let (lib_first, _) = counterexample_pushforward(Exp::int(8)).map_err(|e| e.to_string())?;
    let cut = arcspace::parser::render_param_series(&lib_first.truncate(Bound::Finite(Exp::int(7))));
    ensure(cut == format!("{want} + O(t^7)"), || format!("to O(t^7): {cut}"))?;

    let mut worst: f64 = 0.0;
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        // The t^3 coefficient is 1/(4 eps).
        worst = worst.max((t3_coefficient(eps) * eps / 0.25 - 1.0).abs());
    }
    ensure(worst <= C1_ORACLE_REL, || format!("oracle relative error {worst:e}"))?;
    Ok(format!("oracle rel err {worst:.1e}, cli {:.0} ms", took.as_secs_f64() * 1e3))
}

fn c2() -> Outcome {
    let r = phi_product_residual(Exp::int(12)).map_err(|e| e.to_string())?;
    ensure(r.terms().is_empty() && r.trunc() == Bound::Finite(Exp::int(12)), || format!("residual {r}"))?;
    Ok(format!("residual {r}"))
}

fn c3() -> Outcome {
    let max = monotone_bound_check(GridSpec { lo: -10.0, hi: 10.0, step: 0.01 }, Exec::Parallel);
    let sqrt2 = 2f64.sqrt();
    // s / (2 (s+1) (s+2)) peaks at s = sqrt 2.
    let closed = sqrt2 / (8.0 + 6.0 * sqrt2);
    ensure(max <= C3_MONOTONE_MAX, || format!("grid max {max}"))?;
    ensure((max - closed).abs() <= C3_CLOSED_FORM_TOL, || format!("grid max {max} vs {closed}"))?;
    let (phi_u, _) = phi_chart_maps();
    let det = jacobian_check(&phi_u, &[vec![0.0, 0.0]], Exec::Sequential).map_err(|e| e.to_string())?;
    ensure((det - 1.0).abs() <= C3_JACOBIAN_TOL, || format!("det {det}"))?;
    let h = 1e-5;
    let at = |u: f64, v: f64| eval_map_point(&phi_u, &[u, v]).unwrap();
    let du: Vec<f64> = at(h, 0.0).iter().zip(at(-h, 0.0)).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let dv: Vec<f64> = at(0.0, h).iter().zip(at(0.0, -h)).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let fd = du[0] * dv[1] - du[1] * dv[0];
    ensure((fd - 1.0).abs() <= C3_FINITE_DIFF_TOL, || format!("finite-difference det {fd}"))?;
    Ok(format!("grid max {max:.6} (closed form {closed:.6}), det {det}"))
}

fn c4() -> Outcome {
    let source = match product_topology_limit(family_arc().components()) {
        ProductLimit::Converges(l) => Arc::new(l).to_string(),
        ProductLimit::Diverges(w) => return Err(format!("source diverges: {w}")),
    };
    ensure(source == "(0, t^2)", || format!("source limit {source}"))?;
    let (a, b) = counterexample_pushforward(Exp::int(8)).map_err(|e| e.to_string())?;
    match product_topology_limit(&[a, b]) {
        ProductLimit::Diverges(w) => Ok(format!("source -> {source}, image diverges at {w}")),
        ProductLimit::Converges(l) => Err(format!("image converges to {}", Arc::new(l))),
    }
}

#[allow(clippy::eq_op)]
fn kernel_triple(i: usize, n: Exp) -> Result<(), String> {
    let spec = SamplerSpec::default();
    let mut rng = trial_rng(7, i);
    let a = sample_series(&mut rng, &spec);
    let b = sample_series(&mut rng, &spec);
    let c = sample_series(&mut rng, &spec);
    let ctx = || format!("triple {i}: {a} | {b} | {c}");
    ensure(&(&a + &b) + &c == &a + &(&b + &c), ctx)?;
    ensure(&a + &b == &b + &a && &a * &b == &b * &a, ctx)?;
    ensure(&(&a * &b) * &c == &a * &(&b * &c), ctx)?;
    ensure(&a * &(&b + &c) == &(&a * &b) + &(&a * &c), ctx)?;
    ensure((&a - &a).is_exact_zero() && &a * &Series::one() == a, ctx)?;
    let ord = |s: &PuiseuxSeries| s.valuation().lower_bound();
    ensure(ord(&(&a + &b)) >= ord(&a).min(ord(&b)), ctx)?;
    ensure(ord(&(&a * &b)) == Bound::Finite(a.valuation().order().unwrap() + b.valuation().order().unwrap()), ctx)?;

    let va = a.valuation().order().unwrap();
    let inv = a.inv(n).map_err(|e| e.to_string())?;
    ensure(ord(&(&(&a * &inv) - &Series::one())) >= Bound::Finite(n + va), ctx)?;

    let lead = a.leading().unwrap().1.clone();
    let sq = (&a * &a).pow(Exp::new(1, 2), n + va).map_err(|e| e.to_string())?;
    let abs = if lead > Rat::zero() { a.clone() } else { -&a };
    ensure(ord(&(&sq - &abs)) >= Bound::Finite(n + va), ctx)?;
    let cube = a.pow(Exp::int(3), n).map_err(|e| e.to_string())?;
    ensure(cube == &(&a * &a) * &a, ctx)?;

    let m = a.scale(&lead.recip().unwrap());
    let d = m.reparam_inverse(n).map_err(|e| e.to_string())?;
    let back = m.compose(&d, n).map_err(|e| e.to_string())?;
    let want = n.min(n + Exp::ONE - Exp::ONE / va);
    ensure(ord(&(&back - &Series::t())) >= Bound::Finite(want), ctx)?;
    Ok(())
}

fn c5() -> Outcome {
    let start = Instant::now();
    for i in 0..500 {
        kernel_triple(i, Exp::int(4))?;
    }
    let took = start.elapsed();
    ensure(took <= C5_BUDGET, || format!("500 triples in {took:?}"))?;
    Ok(format!("500 triples in {:.2} s", took.as_secs_f64()))
}

fn certified(p: &PolyOverSeries, b: &RootBranch, target: Exp) -> bool {
    b.certified_order >= Bound::Finite(target)
        && p.eval(&b.series).valuation().lower_bound() >= Bound::Finite(target).min(b.series.trunc())
}

fn product_of_linears(roots: &[PuiseuxSeries]) -> PolyOverSeries {
    let mut coeffs = vec![Series::one()];
    for r in roots {
        // Multiply by (X - r).
        let mut next = vec![Series::zero(); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] = &next[k + 1] + c;
            next[k] = &next[k] - &(c * r);
        }
        coeffs = next;
    }
    PolyOverSeries::new(coeffs).unwrap()
}

fn catalog_spec() -> SamplerSpec {
    SamplerSpec { max_exp_num: 4, max_exp_den: 3, height: 5, max_terms: 2, ..SamplerSpec::default() }
}

fn c6() -> Outcome {
    let target = Exp::int(4);
    let spec = catalog_spec();
    let mut branches = 0;
    for i in 0..50 {
        let mut rng = trial_rng(11, i);
        let deg = rng.gen_range(1..=4);
        let roots: Vec<PuiseuxSeries> = (0..deg).map(|_| sample_series(&mut rng, &spec)).collect();
        let p = product_of_linears(&roots);
        let found = np_roots(&p, target).map_err(|e| format!("catalog {i}: {e}"))?;
        ensure(found.iter().all(|b| certified(&p, b, target)), || format!("catalog {i}: uncertified branch"))?;
        let mult: u32 = found.iter().map(|b| b.multiplicity).sum();
        ensure(mult as usize == deg, || format!("catalog {i}: multiplicities sum to {mult}, degree {deg}"))?;
        for r in &roots {
            let hit = found.iter().any(|b| r.truncate(b.series.trunc()) == b.series);
            ensure(hit, || format!("catalog {i}: root {r} not among branches"))?;
        }
        branches += found.len();
    }

    // X^2 = t (1+t): roots are +-t^(1/2) sum_k binom(1/2, k) t^k.
    let p = PolyOverSeries::new(parse_poly("X^2 - (t + t^2)").unwrap()).unwrap();
    let found = np_roots(&p, target).map_err(|e| e.to_string())?;
    ensure(found.len() == 2, || format!("{} branches for X^2 - (t + t^2)", found.len()))?;
    let half = Rat::frac(1, 2);
    let mut binom = Rat::one();
    let plus = found.iter().find(|b| b.series.leading().unwrap().1 > &Rat::zero()).unwrap();
    let minus = found.iter().find(|b| b.series.leading().unwrap().1 < &Rat::zero()).unwrap();
    // Known to O(t^(7/2)): X^2 - t(1+t) has ord P' = 1/2 at either root.
    let known = plus.series.trunc().min(minus.series.trunc());
    ensure(known >= Bound::Finite(Exp::new(7, 2)), || format!("branches known below {known}"))?;
    let mut k = 0i64;
    while Bound::Finite(Exp::new(2 * k + 1, 2)) < known {
        let e = Exp::new(2 * k + 1, 2);
        ensure(plus.series.coeff(e) == Some(binom.clone()), || format!("coefficient of t^({e})"))?;
        ensure(minus.series.coeff(e) == Some(-&binom), || format!("coefficient of t^({e})"))?;
        binom = &(&binom * &(&half - &Rat::int(k))) / &Rat::int(k + 1);
        k += 1;
    }

    // Odd degree with a factor X^2 + c, c > 0, that has no real root.
    for i in 0..20 {
        let mut rng = trial_rng(13, i);
        let linear = 2 * rng.gen_range(0..=1) + 1;
        let roots: Vec<PuiseuxSeries> = (0..linear).map(|_| sample_series(&mut rng, &spec)).collect();
        let lin = product_of_linears(&roots);
        let c = &Series::constant(Rat::int(rng.gen_range(1..=5))) + &sample_series(&mut rng, &spec);
        let quad = [c, Series::zero(), Series::one()];
        let mut coeffs = vec![Series::zero(); lin.degree() + 3];
        for (a, x) in lin.coeffs().iter().enumerate() {
            for (b, y) in quad.iter().enumerate() {
                coeffs[a + b] = &coeffs[a + b] + &(x * y);
            }
        }
        let p = PolyOverSeries::new(coeffs).unwrap();
        let w = rc_witness_odd(&p, target).map_err(|e| format!("odd instance {i}: {e}"))?;
        ensure(certified(&p, &w, target), || format!("odd instance {i}: uncertified witness"))?;
        ensure(roots.iter().any(|r| r.truncate(w.series.trunc()) == w.series), || {
            format!("odd instance {i}: witness {} is not a linear factor", w.series)
        })?;
    }
    Ok(format!("{branches} catalog branches certified, binomial oracle matched, 20 odd witnesses"))
}

fn c7() -> Outcome {
    let opts = ProbeOptions::default();
    let h = parse_map("x^(1/3)").unwrap();
    let est = holder_probe(&h, &SamplerSpec::default(), 100, 0, &opts).map_err(|e| e.to_string())?;
    ensure(est.alpha == Rat::frac(1, 3), || format!("alpha {}", est.alpha))?;
    let pair = est.worst_pair.clone().unwrap_or_default();
    ensure(pair.iter().any(|a| a == "(-t)"), || format!("worst pair {pair:?}"))?;
    let phi = holder_probe(&phi_map(), &SamplerSpec::default(), C7_PHI_PAIRS, 0, &opts).map_err(|e| e.to_string())?;
    ensure(phi.alpha > Rat::zero() && phi.violations == 0, || {
        format!("phi alpha {} with {} violations", phi.alpha, phi.violations)
    })?;
    Ok(format!(
        "x^(1/3): alpha {} worst {pair:?}; phi: alpha {} over {} pairs ({:?} mode), 0 violations",
        est.alpha, phi.alpha, phi.sample_count, phi.mode
    ))
}

fn c8() -> Outcome {
    let b = BoxSpec::new(vec![(-1.0, 1.0)]).unwrap();
    let f1 = parse_map("(x^2)^(1/2)").unwrap();
    let f2 = parse_map("(x^2)^(3/2)").unwrap();
    let fit = loja_fit(&f1, &f2, &b, 200, 0, C8_VIOLATION, Exec::Parallel).map_err(|e| e.to_string())?;
    ensure((fit.r - 3.0).abs() <= C8_REL * 3.0, || format!("r {}", fit.r))?;
    ensure(fit.validation_violation <= C8_VIOLATION, || {
        format!("validation violation {:e}", fit.validation_violation)
    })?;
    Ok(format!("r {:.6}, c {:.6}, validation violation {:e}", fit.r, fit.c, fit.validation_violation))
}

fn c9() -> Outcome {
    let opts = ProbeOptions::default();
    let spec = SamplerSpec::default();
    let cube = transfer_check(TransferKind::Injective, &parse_map("x^3").unwrap(), &spec, 100, 0, &opts)
        .map_err(|e| e.to_string())?;
    ensure(cube.witness.is_none() && cube.checked + cube.discarded == 100, || format!("x^3: {cube:?}"))?;
    let square = transfer_check(TransferKind::Injective, &parse_map("x^2").unwrap(), &spec, 100, 0, &opts)
        .map_err(|e| e.to_string())?;
    let w = square.witness.ok_or("x^2: no witness")?;
    ensure(w.arcs == ["(t)", "(-t)"], || format!("x^2 witness {:?}", w.arcs))?;
    let h = parse_map_with_vars("(u, u*v, v^2)", &["u", "v"]).unwrap();
    let gamma = parse_arc("(t, t^2, t^2)").unwrap();
    let pre = solve_preimage_arc(&h, &gamma, Exp::int(8)).map_err(|e| e.to_string())?;
    ensure(pre.to_string() == "(t, t)", || format!("preimage {pre}"))?;
    let back = eval_map_on_arc(&h, &pre, Exp::int(8)).map_err(|e| e.to_string())?;
    let zero = back.components().iter().zip(gamma.components()).all(|(a, b)| (a - b).valuation() == Valuation::Zero);
    ensure(zero, || format!("residual of {back}"))?;
    Ok(format!("x^3 {} trials clean, x^2 witness {:?}, preimage {pre}", cube.trials, w.arcs))
}

fn random_expr(rng: &mut impl Rng, depth: u32) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return if rng.gen_bool(0.7) {
            Expr::var(rng.gen_range(0..3))
        } else {
            let mut n = rng.gen_range(-9..9);
            if n >= 0 {
                n += 1;
            }
            Expr::constant(Rat::frac(n, rng.gen_range(1..=4)))
        };
    }
    let op = rng.gen_range(0..6);
    let a = random_expr(rng, depth - 1);
    match op {
        0 => Expr::add(a, random_expr(rng, depth - 1)),
        1 => Expr::sub(a, random_expr(rng, depth - 1)),
        2 => Expr::mul(a, random_expr(rng, depth - 1)),
        3 => Expr::div(a, random_expr(rng, depth - 1)),
        4 => Expr::neg(a),
        _ => {
            let base = a;
            let mut k = rng.gen_range(-4..4);
            if k >= 0 {
                k += 1;
            }
            Expr::pow(base, Exp::new(k, rng.gen_range(1..=4)))
        }
    }
}

const FUZZ_ALPHABET: &[u8] = b"()+-*/^,;:= tTxyzOX0123456789./_#";

fn mutate(rng: &mut impl Rng, text: &str) -> String {
    let mut bytes = text.as_bytes().to_vec();
    for _ in 0..rng.gen_range(1..=3) {
        let at = rng.gen_range(0..=bytes.len());
        match rng.gen_range(0..3) {
            0 if at < bytes.len() => {
                bytes.remove(at);
            }
            1 if at < bytes.len() => bytes[at] = FUZZ_ALPHABET[rng.gen_range(0..FUZZ_ALPHABET.len())],
            _ => bytes.insert(at, FUZZ_ALPHABET[rng.gen_range(0..FUZZ_ALPHABET.len())]),
        }
    }
    String::from_utf8(bytes).expect("ascii")
}

fn c10() -> Outcome {
    let spec = SamplerSpec::default();
    let mut corpus = Vec::new();
    for i in 0..200 {
        let mut rng = trial_rng(17, i);
        let mut s = sample_series(&mut rng, &spec);
        if rng.gen_bool(0.5) {
            s = s.truncate(Bound::Finite(Exp::new(rng.gen_range(1..=12), rng.gen_range(1..=4))));
        }
        let text = render_series(&s);
        let back = parse_series(&text).map_err(|e| format!("series {text}: {e}"))?;
        ensure(back == s && render_series(&back) == text, || format!("series {text} came back as {back}"))?;
        corpus.push(text);
    }
    let vars: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
    for i in 0..100 {
        let mut rng = trial_rng(19, i);
        let outputs = (0..rng.gen_range(1..=3)).map(|_| random_expr(&mut rng, 4)).collect();
        let m = MapExpr::new(vars.clone(), outputs);
        let text = render_map(&m);
        let back = parse_map_with_vars(&text, &["x", "y", "z"]).map_err(|e| format!("map {text}: {e}"))?;
        ensure(back == m && render_map(&back) == text, || format!("map {text} came back as {}", render_map(&back)))?;
        corpus.push(text);
    }

    let malformed = ["", "t^", "(1/0)*t", "t + + t", "O(t^2) + t^3", "t^(1/2", "(t, )", "x y", "t^(x)", "2*t + 3*t"];
    for text in malformed {
        match parse_series(text) {
            Err(e) if e.span().end <= text.len() => {}
            other => return Err(format!("{text:?} gave {other:?}")),
        }
    }
    let mut rejected = 0;
    for (i, text) in corpus.iter().enumerate() {
        let mut rng = trial_rng(23, i);
        for _ in 0..5 {
            let bad = mutate(&mut rng, text);
            let run = catch_unwind(AssertUnwindSafe(|| {
                [
                    parse_series(&bad).err(),
                    parse_arc(&bad).err(),
                    parse_map(&bad).err(),
                    parse_map_with_vars(&bad, &["x", "y", "z"]).err(),
                    parse_poly(&bad).err(),
                ]
            }))
            .map_err(|_| format!("parser panicked on {bad:?}"))?;
            for e in run.into_iter().flatten() {
                let span = e.span();
                ensure(span.start <= span.end && span.end <= bad.len(), || format!("span {span} outside {bad:?}"))?;
                rejected += 1;
            }
        }
    }
    Ok(format!("200 series and 100 maps round-trip, {rejected} fuzzed rejections all spanned"))
}

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|_| {}));
    let criteria: [Criterion; 10] = [
        ("counterexample pushforward", c1),
        ("chart product identity", c2),
        ("monotonicity and jacobian", c3),
        ("product vs t-adic limits", c4),
        ("kernel exactness", c5),
        ("newton-puiseux certificates", c6),
        ("holder probe", c7),
        ("lojasiewicz fit", c8),
        ("transfer checks", c9),
        ("parser round-trip", c10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(f).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}; {secs:.2} s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
