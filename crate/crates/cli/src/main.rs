//! `arcspace`: command-line front end to the arc-space toolkit.
//!
//! Every run emits one report with the fields `kind`, `config`, `result`
//! and `status` (`pass`, `fail` or `witness`), as indented text or as a
//! single JSON object. Exit status is 0 on pass, 2 on a witness and 1 on
//! failure or error. Any argument of the form `@path` is replaced by the
//! contents of that file.

use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use arcspace::newton::{np_roots, NewtonError, PolyOverSeries, RootBranch, RootField};
use arcspace::par::Exec;
use arcspace::param::divergence_witness;
use arcspace::parser::{
    parse_arc, parse_coeff_list, parse_map, parse_poly, render_param_series, render_series, ParseError,
};
use arcspace::probes::{
    holder_probe, loja_fit, product_topology_limit, transfer_check, uniform_modulus_probe, BoxSpec, Mode, ProbeOptions,
    ProductLimit, SamplerSpec, TransferKind,
};
use arcspace::puiseux::{set_ram_cap, Arc, Coeff};
use arcspace::qarith::{Exp, Rat};
use arcspace::transport::{
    counterexample_pushforward, eval_map_on_arc, eval_map_point, family_arc, jacobian_check, monotone_bound_check,
    phi_chart_maps, phi_product_residual, GridSpec,
};

#[derive(Parser, Debug)]
#[command(name = "arcspace", version, about = "Puiseux-series experiments on real arc spaces")]
struct Cli {
    #[command(flatten)]
    cfg: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Config {
    /// Truncation order in t, an integer or a fraction such as 15/2.
    #[arg(long, global = true, default_value = "8", value_parser = parse_exp)]
    t_order: Exp,
    #[arg(long, global = true, default_value_t = 100)]
    trials: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    #[arg(long, global = true, value_enum, default_value_t = Emit::Text)]
    emit: Emit,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
    /// Largest ramification index a series may reach.
    #[arg(long, global = true, default_value_t = 64)]
    ram_cap: u32,
    /// Run probe trials on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Exact,
    Numeric,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Emit {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Push the family (eps t, t^2) through phi and exhibit the divergence.
    Counterexample,
    #[command(subcommand)]
    Probe(Probe),
    /// Real root branches of a polynomial in X over series in t.
    Roots {
        /// Polynomial such as "X^2 - (t + t^2)".
        poly: Option<String>,
        /// Coefficients of X^0, X^1, ... separated by `;`.
        #[arg(long, conflicts_with = "poly")]
        coeffs: Option<String>,
    },
    /// Evaluate a map along an arc, or at a point.
    Eval {
        map: String,
        /// Arc such as "(t, t^2)".
        #[arg(long, required_unless_present = "point")]
        arc: Option<String>,
        /// Comma-separated coordinates.
        #[arg(long, conflicts_with = "arc")]
        point: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum Probe {
    /// Fit the exponent alpha along seeded pairs of arcs.
    Holder {
        map: String,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
    /// Fit phi2 >= c phi1^r on a box.
    Loja {
        phi1: String,
        phi2: String,
        /// Box as `lo,hi;lo,hi;...`.
        #[arg(long = "box", default_value = "0,1")]
        domain: String,
        /// Sample count; defaults to --trials.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Grid estimate of the uniform continuity radius for epsilon.
    Unif {
        map: String,
        #[arg(long = "box", default_value = "0,1")]
        domain: String,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Check that a property of the map transfers to its arc map.
    Transport {
        #[arg(value_enum)]
        kind: KindArg,
        map: String,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
struct SamplerArgs {
    /// Exponent numerators of sampled arcs are at most this.
    #[arg(long, default_value_t = 8)]
    max_exp: i64,
    /// Coefficient height of sampled arcs.
    #[arg(long, default_value_t = 10)]
    height: i64,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum KindArg {
    Injective,
    Surjective,
    LimitAdditive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Status {
    Pass,
    Fail,
    Witness,
}

impl Status {
    fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Witness => 2,
        }
    }
}

#[derive(Serialize)]
struct Report {
    kind: String,
    config: Value,
    result: Value,
    status: Status,
}

fn parse_exp(s: &str) -> Result<Exp, String> {
    let bad = || format!("`{s}` is not an integer or fraction");
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<i64>().map_err(|_| bad())?, d.trim().parse::<i64>().map_err(|_| bad())?),
        None => (s.trim().parse::<i64>().map_err(|_| bad())?, 1),
    };
    if d <= 0 {
        return Err(bad());
    }
    Ok(Exp::new(n, d))
}

fn expand_at_files(args: impl Iterator<Item = String>) -> Result<Vec<String>> {
    args.enumerate()
        .map(|(i, a)| match a.strip_prefix('@') {
            Some(path) if i > 0 && !path.is_empty() => {
                std::fs::read_to_string(path).map(|s| s.trim().to_string()).with_context(|| format!("reading {path}"))
            }
            _ => Ok(a),
        })
        .collect()
}

impl Config {
    fn validate(&self) -> Result<()> {
        if !self.t_order.is_positive() {
            bail!("--t-order must be positive");
        }
        if self.ram_cap < 1 {
            bail!("--ram-cap must be at least 1");
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            bail!("--tolerance must be positive");
        }
        Ok(())
    }

    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }

    fn probe_options(&self) -> ProbeOptions {
        let mode = match self.mode {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Numeric => Mode::Numeric,
        };
        ProbeOptions { mode, tolerance: self.tolerance, exec: self.exec() }
    }

    fn sampler(&self, s: SamplerArgs) -> Result<SamplerSpec> {
        if s.max_exp < 1 || s.height < 1 {
            bail!("--max-exp and --height must be at least 1");
        }
        Ok(SamplerSpec { max_exp_num: s.max_exp, height: s.height, order: self.t_order, ..Default::default() })
    }
}

fn parse_box(text: &str) -> Result<BoxSpec> {
    let bounds = text
        .split(';')
        .map(|iv| {
            let (lo, hi) = iv.split_once(',').ok_or_else(|| anyhow!("interval `{iv}` is not `lo,hi`"))?;
            Ok((lo.trim().parse::<f64>()?, hi.trim().parse::<f64>()?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoxSpec::new(bounds)?)
}

fn rat_json(r: &Rat) -> Value {
    Value::String(r.to_string())
}

fn branch_json<C: Coeff>(b: &RootBranch<C>) -> Value {
    json!({
        "series": b.series.to_string(),
        "multiplicity": b.multiplicity,
        "certified_order": b.certified_order.to_string(),
        "exactness": b.exactness,
    })
}

fn run(cfg: &Config, command: &Command) -> Result<(String, Value, Value, Status)> {
    match command {
        Command::Counterexample => counterexample(cfg).map(|(r, s)| ("counterexample".into(), json!({}), r, s)),
        Command::Roots { poly, coeffs } => {
            let (input, p) = match (poly, coeffs) {
                (Some(p), _) => (json!({ "poly": p }), parse_poly(p)?),
                (None, Some(c)) => (json!({ "coeffs": c }), parse_coeff_list(c)?),
                (None, None) => bail!("give a polynomial or --coeffs"),
            };
            let (r, s) = roots(cfg, p)?;
            Ok(("roots".into(), input, r, s))
        }
        Command::Eval { map, arc, point } => {
            let h = parse_map(map)?;
            if let Some(a) = arc {
                let gamma = parse_arc(a)?;
                let image = eval_map_on_arc(&h, &gamma, cfg.t_order)?;
                let r = json!({ "map": h.to_string(), "arc": gamma.to_string(), "image": image.to_string() });
                Ok(("eval".into(), json!({ "map": map, "arc": a }), r, Status::Pass))
            } else {
                let p = point.as_deref().expect("clap requires --arc or --point");
                let x = p.split(',').map(|c| c.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>()?;
                let image = eval_map_point(&h, &x)?;
                Ok(("eval".into(), json!({ "map": map, "point": x }), json!({ "value": image }), Status::Pass))
            }
        }
        Command::Probe(p) => probe(cfg, p),
    }
}

fn counterexample(cfg: &Config) -> Result<(Value, Status)> {
    if cfg.t_order < Exp::int(3) {
        bail!("counterexample needs --t-order of at least 3");
    }
    let residual = phi_product_residual(Exp::int(12))?;
    let identity = if residual.terms().is_empty() { "pass" } else { "fail" };
    let (first, second) = counterexample_pushforward(cfg.t_order)?;
    let witness = divergence_witness(&first).ok_or_else(|| anyhow!("no divergent coefficient below the order"))?;
    let family = family_arc();
    let source = match product_topology_limit(family.components()) {
        ProductLimit::Converges(l) => json!({ "converges": Arc::new(l).to_string() }),
        ProductLimit::Diverges(w) => json!({ "diverges": w.to_string() }),
    };
    let image = match product_topology_limit(&[first.clone(), second.clone()]) {
        ProductLimit::Converges(l) => json!({ "converges": Arc::new(l).to_string() }),
        ProductLimit::Diverges(w) => json!({ "diverges": w.to_string() }),
    };
    let monotone = monotone_bound_check(GridSpec { lo: -10.0, hi: 10.0, step: 0.01 }, cfg.exec());
    let (phi_u, _) = phi_chart_maps();
    let grid: Vec<Vec<f64>> =
        (0..=20).flat_map(|i| (0..=20).map(move |j| vec![-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64])).collect();
    let jac_origin = jacobian_check(&phi_u, &[vec![0.0, 0.0]], Exec::Sequential)?;
    let jac_min = jacobian_check(&phi_u, &grid, cfg.exec())?;
    let result = json!({
        "phi1_phi2_identity": { "order": "12", "residual": render_series(&residual), "check": identity },
        "pushforward": [render_param_series(&first), render_param_series(&second)],
        "divergence_witness": {
            "t_exp": witness.t_exp.to_string(),
            "eps_exp": witness.eps_exp,
            "coeff": rat_json(&witness.coeff),
            "m0n0": witness.m0n0,
        },
        "product_limit_source": source,
        "product_limit_image": image,
        "monotone_bound_max": monotone,
        "jacobian_det_origin": jac_origin,
        "jacobian_min_abs": jac_min,
    });
    Ok((result, if identity == "pass" { Status::Witness } else { Status::Fail }))
}

fn roots_in<C: RootField>(p: &PolyOverSeries<C>, target: Exp) -> Result<(Value, Status)> {
    match np_roots(p, target) {
        Ok(bs) if bs.is_empty() => Ok((json!({ "branches": [], "error": "no real branch" }), Status::Fail)),
        Ok(bs) => Ok((json!({ "branches": bs.iter().map(branch_json).collect::<Vec<_>>() }), Status::Pass)),
        Err(NewtonError::NoRealBranch) => Ok((json!({ "branches": [], "error": "no real branch" }), Status::Fail)),
        Err(e @ (NewtonError::IrrationalBranch | NewtonError::CoefficientTooLarge)) => {
            bail!("{e} (--mode numeric)")
        }
        Err(e) => Err(e.into()),
    }
}

fn roots(cfg: &Config, coeffs: Vec<arcspace::puiseux::PuiseuxSeries>) -> Result<(Value, Status)> {
    let p = PolyOverSeries::new(coeffs)?;
    if p.degree() == 0 {
        bail!("polynomial has degree 0");
    }
    match cfg.mode {
        ModeArg::Exact => roots_in(&p, cfg.t_order),
        ModeArg::Numeric => roots_in(&p.map_coeffs(Rat::to_f64), cfg.t_order),
    }
}

fn probe(cfg: &Config, p: &Probe) -> Result<(String, Value, Value, Status)> {
    let opts = cfg.probe_options();
    match p {
        Probe::Holder { map, sampler } => {
            let h = parse_map(map)?;
            let est = holder_probe(&h, &cfg.sampler(*sampler)?, cfg.trials, cfg.seed, &opts)?;
            let status = if est.violations == 0 { Status::Pass } else { Status::Witness };
            let input = json!({ "map": map, "sampler": sampler });
            Ok(("probe holder".into(), input, serde_json::to_value(&est)?, status))
        }
        Probe::Loja { phi1, phi2, domain, samples } => {
            let (f1, f2) = (parse_map(phi1)?, parse_map(phi2)?);
            let dom = parse_box(domain)?;
            let n = samples.unwrap_or(cfg.trials);
            let fit = loja_fit(&f1, &f2, &dom, n, cfg.seed, cfg.tolerance, cfg.exec())?;
            let ok = fit.max_violation <= cfg.tolerance && fit.validation_violation <= cfg.tolerance;
            let input = json!({ "phi1": phi1, "phi2": phi2, "box": dom.bounds, "samples": n });
            Ok(("probe loja".into(), input, serde_json::to_value(&fit)?, if ok { Status::Pass } else { Status::Fail }))
        }
        Probe::Unif { map, domain, epsilon, step } => {
            let h = parse_map(map)?;
            let dom = parse_box(domain)?;
            let est = uniform_modulus_probe(&h, &dom, *epsilon, *step, cfg.exec())?;
            let input = json!({ "map": map, "box": dom.bounds, "epsilon": epsilon, "step": step });
            Ok(("probe unif".into(), input, serde_json::to_value(&est)?, Status::Pass))
        }
        Probe::Transport { kind, map, sampler } => {
            let h = parse_map(map)?;
            let kind = match kind {
                KindArg::Injective => TransferKind::Injective,
                KindArg::Surjective => TransferKind::Surjective,
                KindArg::LimitAdditive => TransferKind::LimitAdditive,
            };
            let rep = transfer_check(kind, &h, &cfg.sampler(*sampler)?, cfg.trials, cfg.seed, &opts)?;
            let status = if rep.witness.is_some() { Status::Witness } else { Status::Pass };
            let input = json!({ "map": map, "sampler": sampler });
            Ok(("probe transport".into(), input, serde_json::to_value(&rep)?, status))
        }
    }
}

fn error_json(e: &anyhow::Error) -> Value {
    let mut m = Map::new();
    m.insert("error".into(), Value::String(e.to_string()));
    if let Some(pe) = e.downcast_ref::<ParseError>() {
        m.insert("span".into(), json!([pe.span().start, pe.span().end]));
    }
    Value::Object(m)
}

fn write_text(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match x {
                    Value::Object(inner) if !inner.is_empty() => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        write_text(x, indent + 1, out);
                    }
                    Value::Array(xs) if xs.iter().any(|y| y.is_object()) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        write_text(x, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(x))),
                }
            }
        }
        Value::Array(xs) => {
            for x in xs {
                out.push_str(&format!("{pad}-\n"));
                write_text(x, indent + 1, out);
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(xs) => format!("[{}]", xs.iter().map(scalar).collect::<Vec<_>>().join(", ")),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let args = match expand_at_files(std::env::args()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cfg = cli.cfg;
    let outcome = cfg.validate().and_then(|_| {
        set_ram_cap(cfg.ram_cap);
        run(&cfg, &cli.command)
    });
    let mut config = serde_json::to_value(&cfg).expect("config serializes");
    let (kind, result, status) = match outcome {
        Ok((kind, input, result, status)) => {
            config["input"] = input;
            (kind, result, status)
        }
        Err(e) => (subcommand_name(&cli.command), error_json(&e), Status::Fail),
    };
    let report = Report { kind, config, result, status };
    match cfg.emit {
        Emit::Json => println!("{}", serde_json::to_string(&report).expect("report serializes")),
        Emit::Text => {
            let mut out = String::new();
            write_text(&serde_json::to_value(&report).expect("report serializes"), 0, &mut out);
            print!("{out}");
        }
    }
    ExitCode::from(status.exit_code())
}

fn subcommand_name(c: &Command) -> String {
    match c {
        Command::Counterexample => "counterexample".into(),
        Command::Roots { .. } => "roots".into(),
        Command::Eval { .. } => "eval".into(),
        Command::Probe(p) => match p {
            Probe::Holder { .. } => "probe holder".into(),
            Probe::Loja { .. } => "probe loja".into(),
            Probe::Unif { .. } => "probe unif".into(),
            Probe::Transport { .. } => "probe transport".into(),
        },
    }
}
