//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, Output, SimulateOutputs, Sweep};
use crate::config::{Range, Settings};
use crate::error::{exit, usage, CliError, Result};
use crate::io::emit;
use crate::verify;

#[derive(Debug, Parser)]
#[command(name = "wks", version, about = "Truncation-error bounds and Monte Carlo checks for WKS sampling expansions")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a bound at a given truncation order.
    #[command(subcommand)]
    Bound(BoundKind),
    /// Find the smallest truncation order meeting an accuracy/reliability target.
    #[command(subcommand, name = "min-terms")]
    MinTerms(MinTermsKind),
    /// Minimal orders over parameter grids, with optional gnuplot script.
    #[command(subcommand)]
    Sweep(SweepKind),
    /// Monte Carlo exceedance frequency of the truncation error.
    Simulate(SimulateArgs),
    /// Check bounds against exact oracles and certificates against Monte Carlo.
    Verify(VerifyArgs),
    /// Evaluate the truncated sampling sum from lattice samples.
    Reconstruct(ReconstructArgs),
}

#[derive(Debug, Subcommand)]
enum BoundKind {
    /// Mean-square bound C_n(t)/n^2, or the increment bound with --s.
    Ms(MsArgs),
    /// Tail bound for the L_p([0,T]) error.
    Lp(LpArgs),
    /// Tail bound for the sup-norm error on [0,T].
    Uniform(UniformArgs),
}

#[derive(Debug, Subcommand)]
enum MinTermsKind {
    Lp(MinLpArgs),
    Uniform(MinUniformArgs),
}

#[derive(Debug, Subcommand)]
enum SweepKind {
    /// Minimal n over an (eps, delta) grid in L_p.
    Fig1(SweepArgs),
    /// Minimal n over p at fixed (eps, delta).
    Fig2(SweepArgs),
    /// Minimal n over an (eps, delta) grid for uniform approximation.
    Uniform(SweepArgs),
}

#[derive(Debug, Args)]
struct ProcessArgs {
    /// Flat key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sampling rate omega (samples at k*pi/omega).
    #[arg(long)]
    omega: Option<f64>,
    /// Band edge Lambda < omega.
    #[arg(long)]
    lambda: Option<f64>,
    /// Variance B(0).
    #[arg(long = "B0")]
    b0: Option<f64>,
    /// Horizon T of [0, T].
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Determinative constant C_X.
    #[arg(long)]
    cx: Option<f64>,
    /// Orlicz family: gaussian | power:alpha=A | weibull:alpha=A.
    #[arg(long)]
    family: Option<String>,
    /// Gaussian process (family gaussian, C_X = 1).
    #[arg(long)]
    gaussian: bool,
    /// Discrete spectral measure as a lambda,mass CSV.
    #[arg(long)]
    spectrum: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OrderArgs {
    /// Truncation order n (the sum uses |k| <= n).
    #[arg(long)]
    n: Option<u64>,
    /// Safety parameter z in (0, 1); defaults to the tight value.
    #[arg(long)]
    z: Option<f64>,
}

#[derive(Debug, Args)]
struct MsArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[command(flatten)]
    order: OrderArgs,
    /// Time t; without it a grid over (0, T] is used.
    #[arg(long)]
    t: Option<f64>,
    /// Second time s for the increment bound.
    #[arg(long)]
    s: Option<f64>,
    /// Grid size over (0, T] when --t is absent.
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Debug, Args)]
struct LpArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[command(flatten)]
    order: OrderArgs,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Reliability complement; certifies when given.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Debug, Args)]
struct UniformArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[command(flatten)]
    order: OrderArgs,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// closed-form | optimize | fixed:<theta>
    #[arg(long, alias = "theta-strategy")]
    theta: Option<String>,
}

#[derive(Debug, Args)]
struct MinLpArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Largest n searched.
    #[arg(long)]
    cap: Option<u64>,
    /// Use the looser closed-form Gaussian condition.
    #[arg(long)]
    relaxed: bool,
}

#[derive(Debug, Args)]
struct MinUniformArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// closed-form | optimize | fixed:<theta>
    #[arg(long, alias = "theta-strategy")]
    theta: Option<String>,
    #[arg(long)]
    cap: Option<u64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// lo:hi:steps
    #[arg(long)]
    eps_range: Option<Range>,
    /// lo:hi:steps
    #[arg(long)]
    delta_range: Option<Range>,
    /// lo:hi:steps
    #[arg(long)]
    p_range: Option<Range>,
    /// closed-form | optimize | fixed:<theta> (uniform sweep)
    #[arg(long, alias = "theta-strategy")]
    theta: Option<String>,
    #[arg(long)]
    cap: Option<u64>,
    #[arg(long)]
    relaxed: bool,
    /// Also write a gnuplot script for the sweep.
    #[arg(long)]
    plot_script: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct McArgs {
    /// Random seed; trial i uses stream i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Grid points on [0, T].
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[command(flatten)]
    order: OrderArgs,
    #[command(flatten)]
    mc: McArgs,
    /// lp | sup
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Per-trial CSV (trial,metric_value,exceeded).
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Summary as JSON.
    #[arg(long)]
    summary_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[command(flatten)]
    order: OrderArgs,
    #[command(flatten)]
    mc: McArgs,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[command(flatten)]
    process: ProcessArgs,
    /// Lattice samples as a k,value CSV.
    #[arg(long)]
    samples: Option<PathBuf>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

fn path_str(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.display().to_string())
}

impl ProcessArgs {
    fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::new(),
        };
        s.set_opt("sampling.omega", self.omega);
        s.set_opt("process.lambda", self.lambda);
        s.set_opt("process.B0", self.b0);
        s.set_opt("sampling.T", self.horizon);
        s.set_opt("process.cx", self.cx);
        s.set_opt("process.family", self.family.as_deref());
        s.set_opt("process.spectrum", path_str(&self.spectrum));
        if self.gaussian {
            if self.family.as_deref().is_some_and(|f| f != "gaussian") || self.cx.is_some_and(|c| c != 1.0) {
                return Err(usage!("--gaussian fixes --family gaussian and --cx 1"));
            }
            s.set("process.family", "gaussian");
            s.set("process.cx", 1);
        }
        Ok(s)
    }
}

impl OrderArgs {
    fn apply(&self, s: &mut Settings) {
        s.set_opt("sampling.n", self.n);
        s.set_opt("sampling.z", self.z);
    }
}

impl McArgs {
    fn apply(&self, s: &mut Settings) {
        s.set_opt("mc.seed", self.seed);
        s.set_opt("mc.trials", self.trials);
        s.set_opt("mc.grid", self.grid);
    }
}

fn targets(s: &mut Settings, p: Option<f64>, eps: Option<f64>, delta: Option<f64>) {
    s.set_opt("target.p", p);
    s.set_opt("target.eps", eps);
    s.set_opt("target.delta", delta);
}

fn relaxed(s: &mut Settings, on: bool) {
    if on {
        s.set("search.relaxed", true);
    }
}

/// Executes a parsed command line, returning the output destination and
/// the command's output.
fn dispatch(cli: Cli) -> Result<(Option<PathBuf>, Output)> {
    match cli.command {
        Command::Bound(BoundKind::Ms(a)) => {
            let mut s = a.process.settings()?;
            a.order.apply(&mut s);
            s.set_opt("sampling.t", a.t);
            s.set_opt("sampling.s", a.s);
            s.set_opt("sampling.points", a.points);
            Ok((a.process.out, commands::bound_ms(&s)?))
        }
        Command::Bound(BoundKind::Lp(a)) => {
            let mut s = a.process.settings()?;
            a.order.apply(&mut s);
            targets(&mut s, a.p, a.eps, a.delta);
            Ok((a.process.out, commands::bound_lp(&s)?))
        }
        Command::Bound(BoundKind::Uniform(a)) => {
            let mut s = a.process.settings()?;
            a.order.apply(&mut s);
            targets(&mut s, None, a.eps, a.delta);
            s.set_opt("target.theta", a.theta);
            Ok((a.process.out, commands::bound_uniform(&s)?))
        }
        Command::MinTerms(MinTermsKind::Lp(a)) => {
            let mut s = a.process.settings()?;
            targets(&mut s, a.p, a.eps, a.delta);
            s.set_opt("search.cap", a.cap);
            relaxed(&mut s, a.relaxed);
            Ok((a.process.out, commands::min_terms_lp_cmd(&s)?))
        }
        Command::MinTerms(MinTermsKind::Uniform(a)) => {
            let mut s = a.process.settings()?;
            targets(&mut s, None, a.eps, a.delta);
            s.set_opt("target.theta", a.theta);
            s.set_opt("search.cap", a.cap);
            Ok((a.process.out, commands::min_terms_uniform_cmd(&s)?))
        }
        Command::Sweep(kind) => {
            let (kind, a) = match kind {
                SweepKind::Fig1(a) => (Sweep::Fig1, a),
                SweepKind::Fig2(a) => (Sweep::Fig2, a),
                SweepKind::Uniform(a) => (Sweep::Uniform, a),
            };
            let mut s = a.process.settings()?;
            targets(&mut s, a.p, a.eps, a.delta);
            s.set_opt("sweep.eps", a.eps_range);
            s.set_opt("sweep.delta", a.delta_range);
            s.set_opt("sweep.p", a.p_range);
            s.set_opt("target.theta", a.theta);
            s.set_opt("search.cap", a.cap);
            relaxed(&mut s, a.relaxed);
            let out = commands::sweep(&s, kind, a.process.out.as_deref(), a.plot_script.as_deref())?;
            Ok((a.process.out, out))
        }
        Command::Simulate(a) => {
            let mut s = a.process.settings()?;
            a.order.apply(&mut s);
            a.mc.apply(&mut s);
            targets(&mut s, a.p, a.eps, None);
            s.set_opt("mc.metric", a.metric);
            let outputs = SimulateOutputs { dump: a.dump.as_deref(), summary_json: a.summary_json.as_deref() };
            Ok((a.process.out.clone(), commands::simulate(&s, outputs)?))
        }
        Command::Verify(a) => {
            let mut s = a.process.settings()?;
            a.order.apply(&mut s);
            a.mc.apply(&mut s);
            targets(&mut s, a.p, a.eps, a.delta);
            Ok((a.process.out, verify::verify(&s)?))
        }
        Command::Reconstruct(a) => {
            let mut s = a.process.settings()?;
            s.set_opt("sampling.samples", path_str(&a.samples));
            s.set_opt("sampling.t", a.t);
            s.set_opt("sampling.points", a.points);
            Ok((a.process.out, commands::reconstruct(&s)?))
        }
    }
}

/// Runs the tool on `args` (including the program name) and returns the
/// process exit code. Reports go to stdout or `--out`, diagnostics to
/// stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match dispatch(cli) {
        Ok((out, output)) => {
            if let Err(e) = emit(out.as_deref(), &output.text) {
                eprintln!("wks: error: {e}");
                return exit::USAGE;
            }
            if let Some(m) = output.message {
                eprintln!("wks: {m}");
            }
            output.code
        }
        Err(e) => {
            eprintln!("wks: error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("Run 'wks --help' or 'wks <command> --help' for usage.");
            }
            e.exit_code()
        }
    }
}
