//! Command implementations.
//!
//! Each command first parses and validates all of its parameters (loading
//! input matrices), rejects unknown keys, and only then computes.

use std::collections::BTreeMap;
use std::time::Instant;

use locc_trace::apps::{
    self, estimate_trace_fg, estimate_trace_fg_encoded, AppOptions, BudgetItem, FgMode, FnLabel, RenyiParams,
    SimOptions,
};
use locc_trace::blockenc::{dilate, dilate_perturbed};
use locc_trace::numkit::{hermitian_eig, svd, ComplexMatrix, RngStream};
use locc_trace::parallel::Execution;
use locc_trace::polyapprox::{inverse_poly, log_poly, power_poly, rect_poly, BoundedPolynomial, Parity, PowerSign};
use locc_trace::protocol::{replicate, ProtocolConfig};
use locc_trace::Complex64;
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::inputs::Inputs;
use crate::record::{complex, complex_vec, inputs_hash, Budget, Record, SCHEMA_VERSION};
use crate::spec::{Command, Params, RunSpec};

/// Runs `spec` and returns its records.
pub fn execute(spec: &RunSpec) -> Result<Vec<Record>> {
    let params = Params::new(spec);
    match spec.command {
        Command::Trace => trace(&params),
        Command::RelEntropy => rel_entropy(&params),
        Command::Renyi => renyi(&params),
        Command::Linsolve => linsolve(&params),
        Command::Hamsim => hamsim(&params),
        Command::VerifyPolys => verify_polys(&params),
        Command::VarianceSweep => variance_sweep(&params),
    }
}

struct Emitter<'a> {
    spec: &'a RunSpec,
    hash: String,
    start: Instant,
}

struct Row {
    label: String,
    estimate: Value,
    oracle: Value,
    error: Option<f64>,
    queries: u64,
    budget: Vec<Budget>,
    meta: BTreeMap<String, Value>,
}

impl Row {
    fn new(label: impl Into<String>, estimate: Value) -> Self {
        Self {
            label: label.into(),
            estimate,
            oracle: Value::Null,
            error: None,
            queries: 0,
            budget: Vec::new(),
            meta: BTreeMap::new(),
        }
    }

    fn oracle(mut self, oracle: Value, error: f64) -> Self {
        self.oracle = oracle;
        self.error = Some(error);
        self
    }

    fn queries(mut self, q: u64) -> Self {
        self.queries = q;
        self
    }

    fn budget(mut self, items: &[BudgetItem]) -> Self {
        self.budget = items.iter().map(Budget::from).collect();
        self
    }

    fn meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }
}

impl<'a> Emitter<'a> {
    fn new(spec: &'a RunSpec, resolved: Value) -> Self {
        let inputs = json!({ "spec": spec.echo(), "inputs": resolved });
        Self { spec, hash: inputs_hash(&inputs), start: Instant::now() }
    }

    fn emit(&self, row: Row) -> Record {
        Record {
            schema_version: SCHEMA_VERSION,
            command: self.spec.command.name().to_string(),
            label: row.label,
            seed: self.spec.seed,
            spec: self.spec.echo(),
            inputs_hash: self.hash.clone(),
            estimate: row.estimate,
            oracle: row.oracle,
            error: row.error,
            queries: row.queries,
            eps_budget: row.budget,
            wall_time_s: self.start.elapsed().as_secs_f64(),
            meta: row.meta,
        }
    }
}

fn app_options(p: &Params) -> Result<AppOptions> {
    let mut o = AppOptions::default().with_seed(p.seed());
    o.n_iterations = p.positive_usize("N")?;
    o.m = p.positive_usize("m")?;
    if let Some(g) = p.positive_usize("groups")? {
        o.groups = g;
    }
    if p.bool_or("sequential", false)? {
        o.execution = Execution::Sequential;
    }
    Ok(o)
}

fn eps(p: &Params, default: f64) -> Result<f64> {
    let e = p.f64_or("eps", default)?;
    p.open_interval("eps", e, 0.0, 1.0)
}

fn delta_in(p: &Params, default: f64, hi: f64) -> Result<f64> {
    let d = p.f64_or("delta", default)?;
    if d > 0.0 && d <= hi {
        Ok(d)
    } else {
        Err(CliError::config("delta", format!("{d} outside (0, {hi}]")))
    }
}

fn runs_meta(row: Row, terms: &[apps::TraceTerm]) -> Row {
    let n: Vec<Value> = terms.iter().map(|t| Value::from(t.n_iterations)).collect();
    let capped = terms.iter().any(|t| t.capped);
    row.meta("n_iterations", n).meta("m", terms.first().map_or(0, |t| t.m)).meta("capped", capped)
}

// ---------------------------------------------------------------- trace

/// `f(A)` with the singular-value convention of the estimator: odd functions
/// give `U f(Σ) V†`, even ones `V f(Σ) V†`.
fn sv_function(a: &ComplexMatrix, f: FnLabel) -> Result<ComplexMatrix> {
    let dec = svd(a)?;
    let k = f.degree();
    let odd = k.fract() == 0.0 && (k as u64) % 2 == 1;
    let left = if odd { &dec.left } else { &dec.right };
    let fs: Vec<f64> = dec.singular_values.iter().map(|&s| f.eval(s)).collect();
    let n = a.rows();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        fs.iter().enumerate().map(|(t, &w)| left.get(i, t) * w * dec.right.get(j, t).conj()).sum()
    }))
}

fn trace(p: &Params) -> Result<Vec<Record>> {
    let inputs = Inputs::new(p)?;
    let eps = eps(p, 0.05)?;
    let delta = delta_in(p, 0.1, 0.5)?;
    let f: FnLabel = p.parsed("f", FnLabel::Identity)?;
    let g: FnLabel = p.parsed("g", FnLabel::Identity)?;
    let mode = match p.opt_str("mode")? {
        None | Some("exact-homogeneous") => FgMode::ExactHomogeneous,
        Some("lipschitz") => FgMode::LipschitzApprox,
        Some(other) => {
            return Err(CliError::config("mode", format!("'{other}' is not exact-homogeneous or lipschitz")));
        }
    };
    let perturb = p.opt_f64("perturb")?;
    if let Some(x) = perturb {
        if !(0.0..1.0).contains(&x) {
            return Err(CliError::config("perturb", format!("{x} outside [0, 1)")));
        }
        if mode != FgMode::LipschitzApprox {
            return Err(CliError::config("perturb", "perturbed encodings require mode = \"lipschitz\""));
        }
    }
    let opts = app_options(p)?;
    let a = inputs.matrix_or("a", "fixture:pure-state")?;
    let b = inputs.matrix_or("b", "fixture:pure-state")?;
    p.finish()?;

    let out = Emitter::new(p.spec(), inputs.resolved());
    let result = match perturb {
        Some(x) => {
            let root = RngStream::new(opts.seed).child(0x5045_5254);
            let be_a = dilate_perturbed(&a, 1.0, x, &root.child(0))?;
            let be_b = dilate_perturbed(&b, 1.0, x, &root.child(1))?;
            estimate_trace_fg_encoded(&be_a, &be_b, f, g, eps, delta, &opts)?
        }
        None => estimate_trace_fg(&a, &b, f, g, eps, delta, mode, &opts)?,
    };
    let exact = sv_function(&a, f)?.trace_product(&sv_function(&b, g)?);
    let row = Row::new(format!("Tr({f}(A) {g}(B))"), complex(result.value))
        .oracle(complex(exact), (result.value - exact).norm())
        .queries(result.term.queries)
        .budget(&result.eps_budget)
        .meta("encoding_error_bound", result.encoding_error_bound)
        .meta("mode", serde_json::to_value(result.mode).unwrap_or(Value::Null))
        .meta("std_error", result.term.std_error);
    Ok(vec![out.emit(runs_meta(row, std::slice::from_ref(&result.term)))])
}

// ----------------------------------------------------------- divergences

fn exact_relative_entropy(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    let ln = |m: &ComplexMatrix| -> Result<ComplexMatrix> {
        Ok(hermitian_eig(m)?.map(|l| Complex64::new(l.max(f64::MIN_POSITIVE).ln(), 0.0)))
    };
    Ok(rho.trace_product(&(&ln(rho)? - &ln(sigma)?)).re)
}

fn exact_renyi(rho: &ComplexMatrix, sigma: &ComplexMatrix, alpha: f64) -> Result<f64> {
    let ra = hermitian_eig(rho)?.map(|l| Complex64::new(l.max(0.0).powf(alpha), 0.0));
    let sa = hermitian_eig(sigma)?.map(|l| Complex64::new(if l > 1e-300 { l.powf(1.0 - alpha) } else { 0.0 }, 0.0));
    Ok(ra.trace_product(&sa).re.ln() / (alpha - 1.0))
}

fn rel_entropy(p: &Params) -> Result<Vec<Record>> {
    let inputs = Inputs::new(p)?;
    let eps = eps(p, 0.1)?;
    let delta = delta_in(p, 0.1, 1.0)?;
    let opts = app_options(p)?;
    let rho = inputs.matrix("rho")?;
    let sigma = inputs.matrix("sigma")?;
    p.finish()?;

    let out = Emitter::new(p.spec(), inputs.resolved());
    let r = apps::relative_entropy(&rho, &sigma, eps, delta, &opts)?;
    let exact = exact_relative_entropy(&rho, &sigma)?;
    let row = Row::new("D(rho||sigma)", r.value.into())
        .oracle(exact.into(), (r.value - exact).abs())
        .queries(r.trace_terms.iter().map(|t| t.queries).sum())
        .budget(&r.eps_budget);
    Ok(vec![out.emit(runs_meta(row, &r.trace_terms))])
}

fn renyi(p: &Params) -> Result<Vec<Record>> {
    let inputs = Inputs::new(p)?;
    let eps = eps(p, 0.1)?;
    let alpha = p.required_f64("alpha")?;
    if alpha <= 0.0 || alpha == 1.0 {
        return Err(CliError::config("alpha", format!("{alpha} must be positive and different from 1")));
    }
    let delta = match p.opt_f64("delta")? {
        Some(d) if d > 0.0 && d <= 0.5 => Some(d),
        Some(d) => return Err(CliError::config("delta", format!("{d} outside (0, 0.5]"))),
        None => None,
    };
    let rank = p.positive_usize("rank")?;
    let t_floor = match p.opt_f64("t_floor")? {
        Some(t) if t > 0.0 => Some(t),
        Some(t) => return Err(CliError::config("t_floor", format!("{t} must be positive"))),
        None => None,
    };
    if alpha > 1.0 && delta.is_none() {
        return Err(CliError::config("delta", "alpha > 1 requires an eigenvalue floor delta"));
    }
    if alpha < 1.0 && delta.is_none() && rank.is_none() {
        return Err(CliError::config("rank", "alpha < 1 requires delta or a rank bound"));
    }
    let opts = app_options(p)?;
    let rho = inputs.matrix("rho")?;
    let sigma = inputs.matrix("sigma")?;
    p.finish()?;

    let out = Emitter::new(p.spec(), inputs.resolved());
    let params = RenyiParams { delta, rank, t_floor };
    let r = apps::renyi_entropy(&rho, &sigma, alpha, eps, &params, &opts)?;
    let exact = exact_renyi(&rho, &sigma, alpha)?;
    let row = Row::new(format!("D_{alpha}(rho||sigma)"), r.value.into())
        .oracle(exact.into(), (r.value - exact).abs())
        .queries(r.trace_terms.iter().map(|t| t.queries).sum())
        .budget(&r.eps_budget)
        .meta("t_floor", r.t_floor)
        .meta("trace_estimate", r.trace_estimate)
        .meta("delta_used", r.delta);
    Ok(vec![out.emit(runs_meta(row, &r.trace_terms))])
}

// -------------------------------------------------------------- linsolve

fn linsolve(p: &Params) -> Result<Vec<Record>> {
    let inputs = Inputs::new(p)?;
    let eps = eps(p, 0.1)?;
    let delta = delta_in(p, 0.25, 0.5)?;
    let normalize = p.bool_or("normalize_b", false)?;
    let opts = app_options(p)?;
    let a = inputs.matrix("a")?;
    let mut b = inputs.vector("b")?;
    p.finish()?;
    if normalize {
        let n = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(CliError::config("b", "cannot normalize the zero vector"));
        }
        b.iter_mut().for_each(|z| *z /= n);
    }

    let out = Emitter::new(p.spec(), inputs.resolved());
    let r = apps::linear_solve(&a, &b, eps, delta, &opts)?;
    let row = Row::new("x = A^-1 b", complex_vec(&r.x_tilde))
        .oracle(complex_vec(&r.x_exact), r.error)
        .queries(r.components.iter().map(|t| t.queries).sum())
        .budget(&r.eps_budget)
        .meta("residual", r.residual)
        .meta("per_component_eps", r.per_component_eps);
    Ok(vec![out.emit(runs_meta(row, &r.components))])
}

// ---------------------------------------------------------------- hamsim

fn hamsim(p: &Params) -> Result<Vec<Record>> {
    let inputs = Inputs::new(p)?;
    let d = inputs.d();
    let eps = eps(p, 0.05)?;
    let t_cap = p.f64_or("t_cap", 1.0)?;
    if t_cap <= 0.0 {
        return Err(CliError::config("t_cap", format!("{t_cap} must be positive")));
    }
    let t = p.f64_or("t", 1.0 / (2.0 * (d as f64).sqrt()))?;
    let perturb = p.opt_f64("perturb")?;
    if let Some(x) = perturb {
        if !(0.0..1.0).contains(&x) {
            return Err(CliError::config("perturb", format!("{x} outside [0, 1)")));
        }
    }
    let opts = app_options(p)?;
    let h1 = inputs.matrix_or("h1", "fixture:random-hermitian")?;
    let h2 = inputs.matrix_or("h2", "fixture:random-hermitian")?;
    let m = inputs.matrix_or("observable", "fixture:random-hermitian")?;
    let rho = inputs.matrix_or("rho", "fixture:random-state")?;
    p.finish()?;
    let cap = t_cap / (rho.rows() as f64).sqrt();
    if t.abs() > cap {
        return Err(CliError::config("t", format!("|t| = {t} exceeds the cap {cap}")));
    }

    let out = Emitter::new(p.spec(), inputs.resolved());
    let sim = SimOptions { t_cap_const: t_cap, perturb };
    let r = apps::hamiltonian_expectation(&h1, &h2, &m, &rho, t, eps, &sim, &opts)?;
    let row = Row::new("Tr(M e^{-iHt} rho e^{iHt})", r.estimate.into())
        .oracle(r.exact.into(), (r.estimate - r.exact).abs())
        .queries(r.term.queries)
        .budget(&r.eps_budget)
        .meta("commutator_norm", r.commutator_norm)
        .meta("error_bound", r.error_bound)
        .meta("split_exact", r.split_exact)
        .meta("encoding_error", r.encoding_error)
        .meta("t", t);
    Ok(vec![out.emit(runs_meta(row, std::slice::from_ref(&r.term)))])
}

// ---------------------------------------------------------- verify-polys

const VERIFY_GRID: usize = 10_000;

fn grid(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..VERIFY_GRID).map(move |i| lo + (hi - lo) * i as f64 / (VERIFY_GRID - 1) as f64)
}

fn max_over(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    grid(lo, hi).map(f).fold(f64::NEG_INFINITY, f64::max)
}

fn verify_polys(p: &Params) -> Result<Vec<Record>> {
    let eps = p.f64_or("eps", 1e-3)?;
    let eps = p.open_interval("eps", eps, 0.0, 0.5)?;
    let delta = delta_in(p, 0.1, 0.5)?;
    let t = p.f64_or("t", 0.5)?;
    if !(t > delta && t + delta <= 1.0) {
        return Err(CliError::config("t", format!("need delta < t <= 1 - delta, got t = {t}")));
    }
    let c_pos = p.f64_or("c_positive", 0.5)?;
    let c_neg = p.f64_or("c_negative", 1.0)?;
    if c_pos <= 0.0 {
        return Err(CliError::config("c_positive", format!("{c_pos} must be positive")));
    }
    if c_neg <= 0.0 {
        return Err(CliError::config("c_negative", format!("{c_neg} must be positive")));
    }
    p.finish()?;
    let out = Emitter::new(p.spec(), Value::Null);

    let finish = |target: &str, poly: &BoundedPolynomial, achieved: f64, extra: Vec<(&str, Value)>| {
        let mut row = Row::new(target, achieved.into())
            .meta("target", target)
            .meta("degree", poly.degree())
            .meta("requested_eps", eps)
            .meta("achieved_eps", achieved)
            .meta("holds", achieved <= eps && poly.all_certificates_hold())
            .meta("grid_points", VERIFY_GRID)
            .meta("certificates", serde_json::to_value(&poly.certified).unwrap_or(Value::Null));
        row.error = Some(achieved);
        for (k, v) in extra {
            row = row.meta(k, v);
        }
        out.emit(row)
    };

    let mut records = Vec::new();
    let (p_ln, k) = log_poly(delta, eps)?;
    let err = max_over(delta, 1.0, |x| (p_ln.eval(x) - (1.0 / x).ln() / k).abs());
    let sup = max_over(-1.0, 1.0, |x| p_ln.eval(x).abs());
    records.push(finish("log", &p_ln, err, vec![("k", k.into()), ("sup_norm", sup.into())]));

    let p_rect = rect_poly(t, delta, eps)?;
    let plateau = max_over(0.0, t - delta, |x| 1.0 - p_rect.eval(x));
    let stop = max_over(t + delta, 1.0, |x| p_rect.eval(x));
    let range_ok = grid(-1.0, 1.0).all(|x| (0.0..=1.0).contains(&p_rect.eval(x)));
    records.push(finish(
        "rect",
        &p_rect,
        plateau.max(stop).max(0.0),
        vec![
            ("t", t.into()),
            ("plateau_gap", plateau.into()),
            ("stopband_max", stop.into()),
            ("range_ok", range_ok.into()),
        ],
    ));

    let p_neg = power_poly(c_neg, Parity::Even, delta, eps, PowerSign::Negative)?;
    let scale = delta.powf(c_neg) / 2.0;
    let err = max_over(delta, 1.0, |x| (p_neg.eval(x) - scale * x.powf(-c_neg)).abs());
    records.push(finish("negative_power", &p_neg, err, vec![("c", c_neg.into())]));

    let p_pos = power_poly(c_pos, Parity::Even, delta, eps, PowerSign::Positive)?;
    let err = max_over(delta, 1.0, |x| (p_pos.eval(x) - x.powf(c_pos) / 2.0).abs());
    let envelope = max_over(-1.0, 1.0, |x| p_pos.eval(x).abs() - x.abs().powf(c_pos) / 2.0);
    records.push(finish(
        "positive_power",
        &p_pos,
        err.max(envelope),
        vec![("c", c_pos.into()), ("interval_error", err.into()), ("envelope_excess", envelope.into())],
    ));

    let p_inv = inverse_poly(delta, eps)?;
    let err = max_over(delta, 1.0, |x| (p_inv.eval(x) - 0.75 * delta / x).abs());
    records.push(finish("inverse", &p_inv, err, vec![("value_at_delta", p_inv.eval(delta).into())]));
    Ok(records)
}

// -------------------------------------------------------- variance-sweep

fn variance_sweep(p: &Params) -> Result<Vec<Record>> {
    let dims = p.usize_list("dims", &[2, 4])?;
    if let Some(d) = dims.iter().find(|d| !d.is_power_of_two()) {
        return Err(CliError::config("dims", format!("{d} is not a power of two")));
    }
    let m_factors = p.usize_list("m_factors", &[1, 4, 16])?;
    let ns = p.usize_list("N", &[25, 100])?;
    let replays = p.positive_usize("replays")?.unwrap_or(200);
    if replays < 2 {
        return Err(CliError::config("replays", "need at least 2 replays"));
    }
    let fixture = p.opt_str("fixture")?.unwrap_or("projector");
    if !matches!(fixture, "projector" | "random") {
        return Err(CliError::config("fixture", format!("'{fixture}' is not projector or random")));
    }
    let sequential = p.bool_or("sequential", false)?;
    p.finish()?;
    let out = Emitter::new(p.spec(), Value::Null);

    let root = RngStream::new(p.seed());
    let id = BoundedPolynomial::identity();
    let mut records = Vec::new();
    let mut ratios = Vec::new();
    for &d in &dims {
        let (a, b) = match fixture {
            "projector" => {
                let mut diag = vec![0.0; d];
                diag[0] = 1.0;
                let proj = ComplexMatrix::from_diagonal_real(&diag);
                (proj.clone(), proj)
            }
            _ => (
                locc_trace::numkit::random_contraction(d, 0.9, &root.descend(&[d as u64, 0]))?,
                locc_trace::numkit::random_contraction(d, 0.9, &root.descend(&[d as u64, 1]))?,
            ),
        };
        let (be_a, be_b) = (dilate(&a, 1.0)?, dilate(&b, 1.0)?);
        for &mf in &m_factors {
            let m = mf * d * d;
            for &n in &ns {
                let cfg = ProtocolConfig::new(n, m, p.seed(), id.clone(), id.clone(), be_a.clone(), be_b.clone())?;
                let mut prep = cfg.prepare()?.with_stream(root.descend(&[d as u64, m as u64, n as u64]));
                if sequential {
                    prep = prep.with_execution(Execution::Sequential);
                }
                let values: Vec<Complex64> = replicate(&prep, replays)?.iter().map(|t| t.value).collect();
                let mean = values.iter().sum::<Complex64>() / replays as f64;
                let var = values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (replays - 1) as f64;
                let (df, mf64) = (d as f64, m as f64);
                let law = 1.0 + df * df / mf64 + df.powi(4) / (mf64 * mf64);
                let ratio = var * n as f64 / law;
                ratios.push(ratio);
                let row = Row::new(format!("d={d} m={m} N={n}"), (var * n as f64).into())
                    .queries(prep.queries() * replays as u64)
                    .meta("d", d)
                    .meta("m", m)
                    .meta("N", n)
                    .meta("replays", replays)
                    .meta("variance", var)
                    .meta("law", law)
                    .meta("ratio", ratio)
                    .meta("mean", complex(mean))
                    .meta("exact", complex(a.trace_product(&b)));
                records.push(out.emit(row));
            }
        }
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let total = records.iter().map(|r| r.queries).sum();
    records.push(
        out.emit(
            Row::new("summary", (hi / lo).into())
                .queries(total)
                .meta("min_ratio", lo)
                .meta("max_ratio", hi)
                .meta("cells", ratios.len()),
        ),
    );
    Ok(records)
}
