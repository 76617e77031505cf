//! The `verify` suite: every bound against its exact oracle and every
//! certificate against Monte Carlo, on one Gaussian scenario.

use wks_core::lp_approx::{certify_lp, min_terms_lp, DEFAULT_N_CAP};
use wks_core::ms_bounds::{belyaev_bound, evaluate_b_n, evaluate_c_n, exact_increment_error, exact_ms_error};
use wks_core::spectral_sim::{mc_ms_error, McPlan, Metric};
use wks_core::uniform_approx::{certify_uniform, min_terms_uniform};
use wks_core::{Error, SamplingConfig, SpectralMeasure, ThetaStrategy};

use crate::commands::Output;
use crate::config::Settings;
use crate::error::{exit, usage, Result};
use crate::par;
use crate::report::{opt, Report};
use crate::scenario::Scenario;

pub const COLUMNS: &[&str] = &["check", "status", "value", "limit", "detail"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub value: Option<f64>,
    pub limit: Option<f64>,
    pub detail: String,
    /// Set when the check failed on an admissibility gate.
    pub gate: bool,
}

impl Check {
    fn measured(name: &'static str, value: f64, limit: f64, detail: String) -> Self {
        let status = if value <= limit { Status::Pass } else { Status::Fail };
        Self { name, status, value: Some(value), limit: Some(limit), detail, gate: false }
    }

    fn gate(name: &'static str, e: Error) -> Self {
        Self { name, status: Status::Fail, value: None, limit: None, detail: e.to_string(), gate: true }
    }

    fn skip(name: &'static str, detail: String) -> Self {
        Self { name, status: Status::Skip, value: None, limit: None, detail, gate: false }
    }
}

struct Plan {
    sc: Scenario,
    measure: SpectralMeasure,
    n: Option<u64>,
    z: Option<f64>,
    p: f64,
    eps: f64,
    delta: f64,
    seed: u64,
    trials: u64,
    grid: usize,
}

/// Largest `exact/bound` over the points, or the first gate failure.
fn worst_ratio<I>(points: I) -> std::result::Result<f64, Error>
where
    I: IntoIterator<Item = std::result::Result<(f64, f64), Error>>,
{
    let mut worst: f64 = 0.0;
    for r in points {
        let (exact, bound) = r?;
        if bound > 0.0 {
            worst = worst.max(exact / bound);
        }
    }
    Ok(worst)
}

fn orders(plan: &Plan) -> Vec<u64> {
    plan.n.map_or_else(|| vec![4, 8, 16, 32, 64], |n| vec![n])
}

fn times(horizon: f64, points: usize) -> Vec<f64> {
    (1..=points).map(|i| horizon * i as f64 / points as f64).collect()
}

fn point_domination(plan: &Plan, belyaev: bool) -> Result<Check> {
    let name = if belyaev { "belyaev_domination" } else { "ms_domination" };
    let b0 = plan.sc.spec.b0;
    let mut pts = Vec::new();
    for n in orders(plan) {
        let config = plan.sc.config(n, plan.z)?;
        for t in times(plan.sc.horizon, 32) {
            pts.push((config, t));
        }
    }
    let ratios = pts.iter().map(|(config, t)| {
        let r = evaluate_c_n(config, b0, *t);
        config.check_gate(*t, r.z)?;
        let exact = exact_ms_error(&plan.measure, config, *t, config.n)?;
        let bound = if belyaev { belyaev_bound(config, b0, *t) } else { r.bound_value };
        Ok((exact, bound))
    });
    Ok(match worst_ratio(ratios) {
        Ok(w) => Check::measured(name, w, 1.0, format!("max exact/bound over {} (n, t) points", pts.len())),
        Err(e @ Error::Gate { .. }) => Check::gate(name, e),
        Err(e) => return Err(e.into()),
    })
}

fn increment_domination(plan: &Plan) -> Result<Check> {
    let name = "increment_domination";
    let b0 = plan.sc.spec.b0;
    let grid = times(plan.sc.horizon, 12);
    let mut pts = Vec::new();
    for n in orders(plan) {
        let config = plan.sc.config(n, plan.z)?;
        for &t in &grid {
            for &s in &grid {
                if t != s {
                    pts.push((config, t, s));
                }
            }
        }
    }
    let ratios = pts.iter().map(|(config, t, s)| {
        let r = evaluate_b_n(config, b0, *t, *s);
        config.check_gate(t.max(*s), r.z)?;
        Ok((exact_increment_error(&plan.measure, config, *t, *s)?, r.bound_value))
    });
    Ok(match worst_ratio(ratios) {
        Ok(w) => Check::measured(name, w, 1.0, format!("max exact/bound over {} (n, t, s) points", pts.len())),
        Err(e @ Error::Gate { .. }) => Check::gate(name, e),
        Err(e) => return Err(e.into()),
    })
}

fn mc_check(plan: &Plan, name: &'static str, config: SamplingConfig, metric: Metric, bound: f64) -> Result<Check> {
    let mc = McPlan::new(plan.sc.path_model()?, config, metric, plan.grid)?;
    let (est, _) = par::run_trials(&mc, plan.eps, plan.trials, plan.seed)?;
    let limit = plan.delta + 3.0 * est.std_err;
    let detail = format!(
        "n={} bound={} exceed={}/{} (p_hat <= delta + 3 std_err)",
        config.n, bound, est.exceed_count, est.trials
    );
    Ok(Check::measured(name, est.p_hat, limit, detail))
}

fn lp_monte_carlo(plan: &Plan) -> Result<Check> {
    let name = "lp_monte_carlo";
    let sc = &plan.sc;
    let cert = match plan.n {
        Some(n) => match certify_lp(&sc.spec, &sc.config(n, plan.z)?, plan.p, plan.eps, plan.delta) {
            Ok(c) => c,
            Err(e @ Error::Gate { .. }) => return Ok(Check::gate(name, e)),
            Err(e) => return Err(e.into()),
        },
        None => min_terms_lp(&sc.spec, sc.omega, sc.horizon, plan.p, plan.eps, plan.delta, DEFAULT_N_CAP)?.certificate,
    };
    if !cert.certified {
        return Ok(Check::skip(name, format!("n={} is not certified", cert.n)));
    }
    let config = sc.config(cert.n, plan.z)?;
    mc_check(plan, name, config, Metric::Lp { p: plan.p }, cert.tail_bound.unwrap_or(f64::NAN))
}

fn uniform_monte_carlo(plan: &Plan) -> Result<Check> {
    let name = "uniform_monte_carlo";
    let sc = &plan.sc;
    let cert = match plan.n {
        Some(n) => {
            match certify_uniform(&sc.spec, &sc.config(n, plan.z)?, plan.eps, plan.delta, ThetaStrategy::ClosedForm) {
                Ok(c) => c,
                Err(e @ Error::Gate { .. }) => return Ok(Check::gate(name, e)),
                Err(e) => return Err(e.into()),
            }
        }
        None => {
            min_terms_uniform(
                &sc.spec,
                sc.omega,
                sc.horizon,
                plan.eps,
                plan.delta,
                ThetaStrategy::ClosedForm,
                DEFAULT_N_CAP,
            )?
            .certificate
        }
    };
    if !cert.certified {
        return Ok(Check::skip(name, format!("n={} is not certified", cert.n)));
    }
    let config = sc.config(cert.n, plan.z)?;
    mc_check(plan, name, config, Metric::Sup, cert.bound.unwrap_or(f64::NAN))
}

fn mc_vs_exact(plan: &Plan) -> Result<Check> {
    let name = "mc_vs_exact";
    let n = plan.n.unwrap_or(4);
    let config = plan.sc.config(n, None)?;
    let t = 0.5 * plan.sc.horizon;
    let exact = exact_ms_error(&plan.measure, &config, t, n)?;
    let est = mc_ms_error(&plan.sc.path_model()?, &config, t, plan.trials, plan.seed)?;
    Ok(Check::measured(
        name,
        (est.mean - exact).abs(),
        3.0 * est.std_err,
        format!("n={n} t={t} mc_mean={} exact={exact}", est.mean),
    ))
}

/// Runs every check. The checks are deterministic given the settings.
pub fn run_checks(s: &Settings) -> Result<Vec<Check>> {
    let sc = Scenario::resolve(s, true)?;
    if !sc.spec.is_gaussian() {
        return Err(usage!("verify runs on gaussian processes only"));
    }
    let plan = Plan {
        measure: sc.spectral_measure()?,
        n: s.get("sampling.n")?,
        z: s.get("sampling.z")?,
        p: s.get_or("target.p", 2.0)?,
        eps: s.get_or("target.eps", 0.5)?,
        delta: s.get_or("target.delta", 0.1)?,
        seed: s.require("mc.seed")?,
        trials: s.get_or("mc.trials", 2000)?,
        grid: s.get_or("mc.grid", 513)?,
        sc,
    };
    Ok(vec![
        point_domination(&plan, false)?,
        increment_domination(&plan)?,
        point_domination(&plan, true)?,
        lp_monte_carlo(&plan)?,
        uniform_monte_carlo(&plan)?,
        mc_vs_exact(&plan)?,
    ])
}

pub fn verify(s: &Settings) -> Result<Output> {
    let checks = run_checks(s)?;
    let mut report = Report::new("verify", COLUMNS);
    let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
    let gate = checks.iter().any(|c| c.gate);
    report.note(format!("{} checks, {failed} failed", checks.len()));
    for c in &checks {
        report.row(vec![
            c.name.to_string(),
            c.status.label().to_string(),
            opt(c.value),
            opt(c.limit),
            c.detail.clone(),
        ]);
    }
    let (code, message) = if gate {
        (exit::GATE, Some("admissibility gate violated; see report".to_string()))
    } else if failed > 0 {
        (exit::NUMERIC, Some(format!("{failed} checks failed")))
    } else {
        (exit::OK, None)
    };
    Ok(Output { text: report.render(s), code, message })
}
