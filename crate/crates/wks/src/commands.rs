//! Subcommand bodies. Each returns the rendered output and an exit code;
//! argument parsing lives in [`crate::cli`].

use std::path::{Path, PathBuf};

use wks_core::lp_approx::{
    certify_lp, gaussian_tail, min_terms_lp, min_terms_lp_relaxed, tail_bound_lp, DEFAULT_N_CAP,
};
use wks_core::ms_bounds::{
    belyaev_bound, evaluate_b_n, evaluate_c_n, exact_increment_error, exact_ms_error, MsConstants,
};
use wks_core::sampling::truncated_sum;
use wks_core::spectral_sim::{McPlan, Metric};
use wks_core::uniform_approx::{certify_uniform, min_terms_uniform, uniform_bound};
use wks_core::{Error, LatticeSamples, LpCertificate, SamplingConfig, ThetaStrategy, UniformCertificate};

use crate::config::{Range, Settings};
use crate::error::{exit, usage, CliError, Result};
use crate::io::{emit, read_samples};
use crate::par;
use crate::report::{csv_table, flag, header, num, opt, Report};
use crate::scenario::Scenario;

pub const MS_COLUMNS: &[&str] = &["t", "bound", "oracle", "admissible"];
pub const MS_INCREMENT_COLUMNS: &[&str] = &["t", "s", "bound", "oracle", "admissible"];
pub const LP_COLUMNS: &[&str] = &["eps", "delta", "p", "n", "z", "S_np", "tail_bound", "certified"];
pub const UNIFORM_COLUMNS: &[&str] = &["eps", "delta", "n", "theta", "Cn", "bn", "bound", "certified"];
pub const SIMULATE_COLUMNS: &[&str] =
    &["metric", "p", "eps", "n", "trials", "exceed_count", "p_hat", "std_err", "seed", "bound"];
pub const TRIAL_COLUMNS: &[&str] = &["trial", "metric_value", "exceeded"];

/// Rendered output, exit code, and a message for stderr.
#[derive(Debug, Clone)]
pub struct Output {
    pub text: String,
    pub code: i32,
    pub message: Option<String>,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, code: exit::OK, message: None }
    }

    fn with_gate(text: String, message: Option<String>) -> Self {
        let code = if message.is_some() { exit::GATE } else { exit::OK };
        Self { text, code, message }
    }
}

fn gate_message(e: Error) -> String {
    e.to_string()
}

/// `points` times spread over `(0, T]`.
fn time_grid(horizon: f64, points: usize) -> Vec<f64> {
    (1..=points).map(|i| horizon * i as f64 / points as f64).collect()
}

pub fn bound_ms(s: &Settings) -> Result<Output> {
    let sc = Scenario::resolve(s, false)?;
    let config = sc.config_from(s)?;
    let b0 = sc.spec.b0;
    let times = match s.get::<f64>("sampling.t")? {
        Some(t) => vec![t],
        None => time_grid(sc.horizon, s.get_or("sampling.points", 16usize)?),
    };
    if times.iter().any(|&t| !(t > 0.0)) {
        return Err(usage!("--t must be positive"));
    }
    let increment_at: Option<f64> = s.get("sampling.s")?;
    let mut gate = None;
    let mut report;
    match increment_at {
        None => {
            report = Report::new("bound ms", MS_COLUMNS);
            for &t in &times {
                let r = evaluate_c_n(&config, b0, t);
                if !r.admissible && gate.is_none() {
                    gate = config.check_gate(t, r.z).err().map(gate_message);
                }
                let oracle = sc.measure.as_ref().map(|m| exact_ms_error(m, &config, t, config.n)).transpose()?;
                if times.len() == 1 {
                    if let MsConstants::Point { c_n } = r.constants {
                        report.note(format!("C_n(t) = {c_n} at z = {}", r.z));
                    }
                    report.note(format!("E|X(t) - X_n(t)|^2 <= C_n(t)/n^2 = {}", r.bound_value));
                    report.note(format!("Belyaev bound = {}", belyaev_bound(&config, b0, t)));
                }
                report.row(vec![num(t), num(r.bound_value), opt(oracle), flag(r.admissible)]);
            }
        }
        Some(sv) => {
            if !(sv > 0.0) {
                return Err(usage!("--s must be positive"));
            }
            report = Report::new("bound ms", MS_INCREMENT_COLUMNS);
            for &t in &times {
                let r = evaluate_b_n(&config, b0, t, sv);
                if !r.admissible && gate.is_none() {
                    gate = config.check_gate(t.max(sv), r.z).err().map(gate_message);
                }
                let oracle = sc.measure.as_ref().map(|m| exact_increment_error(m, &config, t, sv)).transpose()?;
                if let (1, MsConstants::Increment { b_n, w_n, q_n }) = (times.len(), r.constants) {
                    report.note(format!("b_n(t, s) = {b_n} (W_n = {w_n}, Q_n = {q_n}) at z = {}", r.z));
                    report.note(format!("E(Y_n(t) - Y_n(s))^2 <= ((t - s)/n)^2 b_n = {}", r.bound_value));
                }
                report.row(vec![num(t), num(sv), num(r.bound_value), opt(oracle), flag(r.admissible)]);
            }
        }
    }
    if let Some(m) = &gate {
        report.note(m.clone());
    }
    Ok(Output::with_gate(report.render(s), gate))
}

fn lp_row(c: &LpCertificate) -> Vec<String> {
    vec![
        num(c.eps),
        opt(c.delta),
        num(c.p),
        c.n.to_string(),
        num(c.z),
        num(c.s_np),
        opt(c.tail_bound),
        flag(c.certified),
    ]
}

const LP_THRESHOLD: &str = "eps > S_np*f(p*(S_np/eps)^(1/p))^p";

pub fn bound_lp(s: &Settings) -> Result<Output> {
    let sc = Scenario::resolve(s, false)?;
    let config = sc.config_from(s)?;
    let p = s.get_or("target.p", 2.0)?;
    let eps = s.require("target.eps")?;
    let cert = match s.get::<f64>("target.delta")? {
        Some(delta) => certify_lp(&sc.spec, &config, p, eps, delta)?,
        None => tail_bound_lp(&sc.spec, &config, p, eps)?,
    };
    let mut report = Report::new("bound lp", LP_COLUMNS);
    report.note(format!("S_np = {}", cert.s_np));
    if sc.spec.is_gaussian() {
        report.note(format!(
            "gaussian form: valid for eps > S_np*p^(p/2) = {}, bound 2exp(-(eps/S_np)^(2/p)/2)",
            cert.s_np * p.powf(0.5 * p)
        ));
    }
    let gate = (!cert.threshold_ok).then(|| format!("threshold violated: {LP_THRESHOLD}"));
    if let Some(m) = &gate {
        report.note(m.clone());
    }
    report.row(lp_row(&cert));
    Ok(Output::with_gate(report.render(s), gate))
}

fn uniform_row(c: &UniformCertificate) -> Vec<String> {
    vec![
        num(c.eps),
        opt(c.delta),
        c.n.to_string(),
        opt(c.theta),
        num(c.c_n),
        num(c.b_n),
        opt(c.bound),
        flag(c.certified),
    ]
}

fn uniform_notes(report: &mut Report, c: &UniformCertificate) {
    if let Some(b) = c.bound_unscaled {
        report.note(format!("bound without the leading factor 2 = {b}"));
    }
    if c.eps0_exceeds_cn {
        report.note(format!(
            "diagnostic: direct estimate of sup tau(X - X_n) = {} exceeds C_n = {}",
            c.eps0_direct, c.c_n
        ));
    }
}

fn theta_strategy(s: &Settings, default: &str) -> Result<ThetaStrategy> {
    let raw: String = s.get_or("target.theta", default.to_string())?;
    Ok(raw.parse()?)
}

pub fn bound_uniform(s: &Settings) -> Result<Output> {
    let sc = Scenario::resolve(s, false)?;
    let config = sc.config_from(s)?;
    let eps = s.require("target.eps")?;
    let strategy = theta_strategy(s, "optimize")?;
    let cert = match s.get::<f64>("target.delta")? {
        Some(delta) => certify_uniform(&sc.spec, &config, eps, delta, strategy)?,
        None => uniform_bound(&sc.spec, &config, eps, strategy)?,
    };
    let mut report = Report::new("bound uniform", UNIFORM_COLUMNS);
    uniform_notes(&mut report, &cert);
    let gate = cert.theta.is_none().then(|| format!("threshold violated: eps > C_n (C_n = {})", cert.c_n));
    if let Some(m) = &gate {
        report.note(m.clone());
    }
    report.row(uniform_row(&cert));
    Ok(Output::with_gate(report.render(s), gate))
}

fn relaxed_row(eps: f64, delta: f64, p: f64, r: &wks_core::lp_approx::RelaxedLpBound) -> Vec<String> {
    vec![
        num(eps),
        num(delta),
        num(p),
        r.n.to_string(),
        num(r.z),
        num(r.s_upper),
        num(gaussian_tail(r.s_upper, p, eps)),
        flag(r.holds),
    ]
}

/// Minimal-order row for one `(ε, δ, p)`; `Ok(None)` when unsatisfiable.
fn lp_search(sc: &Scenario, p: f64, eps: f64, delta: f64, cap: u64, relaxed: bool) -> Result<Option<Vec<String>>> {
    let found = if relaxed {
        min_terms_lp_relaxed(sc.spec.b0, sc.spec.band_edge, sc.omega, sc.horizon, p, eps, delta, cap)
            .map(|m| relaxed_row(eps, delta, p, &m.certificate))
    } else {
        min_terms_lp(&sc.spec, sc.omega, sc.horizon, p, eps, delta, cap).map(|m| lp_row(&m.certificate))
    };
    match found {
        Ok(row) => Ok(Some(row)),
        Err(Error::Unsatisfiable { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn unsatisfiable_lp_row(eps: f64, delta: f64, p: f64) -> Vec<String> {
    vec![num(eps), num(delta), num(p), String::new(), String::new(), String::new(), String::new(), flag(false)]
}

fn search_settings(s: &Settings, sc: &Scenario) -> Result<(u64, bool)> {
    let cap = s.get_or("search.cap", DEFAULT_N_CAP)?;
    let relaxed = s.flag("search.relaxed")?;
    if relaxed && !sc.spec.is_gaussian() {
        return Err(usage!("--relaxed applies to gaussian processes only"));
    }
    Ok((cap, relaxed))
}

pub fn min_terms_lp_cmd(s: &Settings) -> Result<Output> {
    let sc = Scenario::resolve(s, false)?;
    let p = s.get_or("target.p", 2.0)?;
    let eps = s.require("target.eps")?;
    let delta = s.require("target.delta")?;
    let (cap, relaxed) = search_settings(s, &sc)?;
    let row = lp_search(&sc, p, eps, delta, cap, relaxed)?.ok_or(Error::Unsatisfiable { cap })?;
    let mut report = Report::new("min-terms lp", LP_COLUMNS);
    report.note(format!("minimal n = {}", row[3]));
    report.row(row);
    Ok(Output::ok(report.render(s)))
}

pub fn min_terms_uniform_cmd(s: &Settings) -> Result<Output> {
    let sc = Scenario::resolve(s, false)?;
    let eps = s.require("target.eps")?;
    let delta = s.require("target.delta")?;
    let strategy = theta_strategy(s, "closed-form")?;
    let cap = s.get_or("search.cap", DEFAULT_N_CAP)?;
    let m = min_terms_uniform(&sc.spec, sc.omega, sc.horizon, eps, delta, strategy, cap)?;
    let mut report = Report::new("min-terms uniform", UNIFORM_COLUMNS);
    report.note(format!("minimal n = {}", m.n));
    uniform_notes(&mut report, &m.certificate);
    report.row(uniform_row(&m.certificate));
    Ok(Output::ok(report.render(s)))
}

/// Which figure-style sweep to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    /// Minimal `n` over an `(ε, δ)` grid at fixed `p`.
    Fig1,
    /// Minimal `n` over `p` at fixed `(ε, δ)`.
    Fig2,
    /// Minimal `n` for uniform approximation over an `(ε, δ)` grid.
    Uniform,
}

impl Sweep {
    fn name(self) -> &'static str {
        match self {
            Sweep::Fig1 => "fig1",
            Sweep::Fig2 => "fig2",
            Sweep::Uniform => "uniform",
        }
    }
}

pub fn sweep(s: &Settings, kind: Sweep, out: Option<&Path>, plot_script: Option<&Path>) -> Result<Output> {
    let sc = Scenario::resolve(s, false)?;
    let cap = s.get_or("search.cap", DEFAULT_N_CAP)?;
    let command = format!("sweep {}", kind.name());
    let unit = Range { lo: 0.05, hi: 1.0, steps: 20 };
    let (columns, rows): (&[&'static str], Vec<SweepRow>) = match kind {
        Sweep::Fig1 | Sweep::Fig2 => {
            let (_, relaxed) = search_settings(s, &sc)?;
            let points: Vec<(f64, f64, f64)> = if kind == Sweep::Fig1 {
                let p = s.get_or("target.p", 2.0)?;
                let eps = s.get_or("sweep.eps", unit)?.points();
                let delta = s.get_or("sweep.delta", unit)?.points();
                eps.iter().flat_map(|&e| delta.iter().map(move |&d| (e, d, p))).collect()
            } else {
                let eps = s.get_or("target.eps", 0.1)?;
                let delta = s.get_or("target.delta", 0.1)?;
                let ps = s.get_or("sweep.p", Range { lo: 1.0, hi: 2.0, steps: 21 })?.points();
                ps.iter().map(|&p| (eps, delta, p)).collect()
            };
            let found = par::map(&points, |&(e, d, p)| lp_search(&sc, p, e, d, cap, relaxed));
            let mut rows = Vec::with_capacity(points.len());
            for (r, &(e, d, p)) in found.into_iter().zip(&points) {
                rows.push(r?.ok_or_else(|| unsatisfiable_lp_row(e, d, p)));
            }
            (LP_COLUMNS, rows)
        }
        Sweep::Uniform => {
            let strategy = theta_strategy(s, "closed-form")?;
            let eps = s.get_or("sweep.eps", unit)?.points();
            let delta = s.get_or("sweep.delta", unit)?.points();
            let points: Vec<(f64, f64)> = eps.iter().flat_map(|&e| delta.iter().map(move |&d| (e, d))).collect();
            let found = par::map(&points, |&(e, d)| {
                match min_terms_uniform(&sc.spec, sc.omega, sc.horizon, e, d, strategy, cap) {
                    Ok(m) => Ok(Ok(uniform_row(&m.certificate))),
                    Err(Error::Unsatisfiable { .. }) => {
                        let mut row = vec![num(e), num(d)];
                        row.extend(std::iter::repeat_n(String::new(), 5));
                        row.push(flag(false));
                        Ok(Err(row))
                    }
                    Err(err) => Err(CliError::from(err)),
                }
            });
            (UNIFORM_COLUMNS, found.into_iter().collect::<Result<Vec<_>>>()?)
        }
    };
    finish_sweep(s, kind, &command, columns, rows, out, plot_script)
}

/// A sweep row; `Err` carries the row written for an unsatisfiable point.
type SweepRow = std::result::Result<Vec<String>, Vec<String>>;

fn finish_sweep(
    s: &Settings,
    kind: Sweep,
    command: &str,
    columns: &[&'static str],
    rows: Vec<SweepRow>,
    out: Option<&Path>,
    plot_script: Option<&Path>,
) -> Result<Output> {
    let mut report = Report::new(command, columns);
    let unsatisfiable = rows.iter().filter(|r| r.is_err()).count();
    if unsatisfiable > 0 {
        report.note(format!("{unsatisfiable} grid points unsatisfiable under the search cap (empty n)"));
    }
    for r in rows {
        report.row(r.unwrap_or_else(|row| row));
    }
    let text = report.render(s);
    if let Some(path) = plot_script {
        let data = out.map_or_else(|| PathBuf::from("sweep.csv"), Path::to_path_buf);
        emit(Some(path), &plot_script_for(kind, &data, s))?;
    }
    let code = if unsatisfiable > 0 { exit::UNSATISFIABLE } else { exit::OK };
    Ok(Output { text, code, message: (unsatisfiable > 0).then(|| "some grid points are unsatisfiable".into()) })
}

/// Gnuplot script rendering a sweep CSV to PNG next to the data file.
pub fn plot_script_for(kind: Sweep, data: &Path, s: &Settings) -> String {
    let data_str = data.display().to_string();
    let png = data.with_extension("png").display().to_string();
    let mut out = header(&format!("sweep {} plot script", kind.name()), s);
    out.push_str("set datafile separator ','\nset datafile commentschars '#'\n");
    out.push_str(&format!("set terminal pngcairo size 900,700\nset output '{png}'\n"));
    match kind {
        Sweep::Fig1 => out.push_str(&format!(
            "set xlabel 'eps'\nset ylabel 'delta'\nset zlabel 'n' rotate by 90\nset dgrid3d 20,20 qnorm 2\nset hidden3d\n\
             splot '{data_str}' skip 1 using 1:2:4 with lines title 'minimal n'\n"
        )),
        Sweep::Fig2 => out.push_str(&format!(
            "set xlabel 'p'\nset ylabel 'n'\nset grid\nplot '{data_str}' skip 1 using 3:4 with linespoints pt 7 title 'minimal n'\n"
        )),
        Sweep::Uniform => out.push_str(&format!(
            "set xlabel 'eps'\nset ylabel 'delta'\nset zlabel 'n' rotate by 90\nset dgrid3d 20,20 qnorm 2\nset hidden3d\n\
             splot '{data_str}' skip 1 using 1:2:3 with lines title 'minimal n (uniform)'\n"
        )),
    }
    out
}

pub struct SimulateOutputs<'a> {
    pub dump: Option<&'a Path>,
    pub summary_json: Option<&'a Path>,
}

pub fn simulate(s: &Settings, outputs: SimulateOutputs<'_>) -> Result<Output> {
    let sc = Scenario::resolve(s, false)?;
    let config = sc.config_from(s)?;
    let metric_name: String = s.get_or("mc.metric", "sup".to_string())?;
    let eps: f64 = s.require("target.eps")?;
    let seed: u64 = s.require("mc.seed")?;
    let trials: u64 = s.get_or("mc.trials", 10_000)?;
    let grid: usize = s.get_or("mc.grid", 513)?;
    let (metric, p) = match metric_name.as_str() {
        "lp" => {
            let p = s.get_or("target.p", 2.0)?;
            (Metric::Lp { p }, Some(p))
        }
        "sup" => (Metric::Sup, None),
        other => return Err(usage!("unknown --metric '{other}' (lp | sup)")),
    };
    let model = sc.path_model()?;
    let plan = McPlan::new(model.clone(), config, metric, grid)?;
    let (estimate, metrics) = par::run_trials(&plan, eps, trials, seed)?;

    let mut report = Report::new("simulate", SIMULATE_COLUMNS);
    let bound = if model.supports_ssub_certification() {
        certificate_bound(&sc, &config, metric, eps)?
    } else {
        report.note("certification refused: phi(sqrt(x)) is not convex for this family");
        None
    };
    if let Some(b) = bound {
        report.note(format!("p_hat <= bound + 3 std_err: {}", estimate.dominated_by(b, 3.0)));
    }
    report.row(vec![
        metric_name.clone(),
        opt(p),
        num(eps),
        config.n.to_string(),
        estimate.trials.to_string(),
        estimate.exceed_count.to_string(),
        num(estimate.p_hat),
        num(estimate.std_err),
        estimate.seed.to_string(),
        opt(bound),
    ]);
    let text = report.render(s);
    if let Some(path) = outputs.dump {
        let rows: Vec<Vec<String>> =
            metrics.iter().enumerate().map(|(i, &m)| vec![i.to_string(), num(m), flag(m > eps)]).collect();
        let mut dump = header("simulate trials", s);
        dump.push_str(&csv_table(TRIAL_COLUMNS, &rows));
        emit(Some(path), &dump)?;
    }
    if let Some(path) = outputs.summary_json {
        let config: serde_json::Map<String, serde_json::Value> =
            s.echo().into_iter().map(|(k, v)| (k, serde_json::Value::String(v))).collect();
        let summary = serde_json::json!({
            "tool": format!("wks {}", crate::report::VERSION),
            "command": "simulate",
            "config": config,
            "metric": metric_name,
            "eps": eps,
            "n": plan.config().n,
            "trials": estimate.trials,
            "exceed_count": estimate.exceed_count,
            "p_hat": estimate.p_hat,
            "std_err": estimate.std_err,
            "seed": estimate.seed,
            "bound": bound,
        });
        emit(Some(path), &(serde_json::to_string_pretty(&summary).expect("serializable") + "\n"))?;
    }
    Ok(Output::ok(text))
}

/// The certificate's tail bound for the simulated metric, if it applies.
fn certificate_bound(sc: &Scenario, config: &SamplingConfig, metric: Metric, eps: f64) -> Result<Option<f64>> {
    Ok(match metric {
        Metric::Lp { p } => tail_bound_lp(&sc.spec, config, p, eps)?.tail_bound,
        Metric::Sup => uniform_bound(&sc.spec, config, eps, ThetaStrategy::Optimize)?.bound,
    })
}

pub fn reconstruct(s: &Settings) -> Result<Output> {
    let path: PathBuf = s.require("sampling.samples")?;
    let pairs = read_samples(&path)?;
    let n = pairs.iter().map(|(k, _)| k.unsigned_abs()).max().unwrap_or(0);
    if n == 0 {
        return Err(usage!("{}: need samples for k = -n..=n with n >= 1", path.display()));
    }
    let samples = LatticeSamples::from_pairs(n, pairs)?;
    let sc = Scenario::resolve(s, false)?;
    s.note("sampling.n", n);
    let config = sc.config(n, None)?;
    let times = match s.get::<f64>("sampling.t")? {
        Some(t) => vec![t],
        None => {
            let points = s.get_or("sampling.points", 101usize)?;
            wks_core::spectral_sim::uniform_grid(sc.horizon, points)?
        }
    };
    let mut report = Report::new("reconstruct", &["t", "value"]);
    for t in times {
        report.row(vec![num(t), num(truncated_sum(&samples, &config, t)?)]);
    }
    Ok(Output::ok(report.render(s)))
}
