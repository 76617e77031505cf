//! Simulation of stationary bandlimited processes from finite trigonometric
//! expansions and Monte Carlo estimation of truncation-error exceedance.
//!
//! A path is `X(t) = Σ_j a_j (ξ_j cos(λ_j t) + η_j sin(λ_j t))` with i.i.d.
//! coefficients. Standard normal coefficients and `a_j = √mass_j` over the
//! symmetric pairs of a discrete spectral measure give a Gaussian process
//! with exactly that spectrum; two-sided Weibull coefficients give a strictly
//! φ-sub-Gaussian one.
//!
//! Trial `i` of a run with seed `s` draws from ChaCha20 seeded with `s` on
//! stream `i`, so trials can run in any order or in parallel.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, input};
use crate::ms_bounds::SpectralMeasure;
use crate::numeric::{golden_section_max, simpson_uniform};
use crate::orlicz::OrliczFunction;
use crate::sampling::{truncated_sum_unchecked, LatticeSamples, SamplingConfig, SINGULARITY_EPS};
use crate::{Error, Result};

/// Distribution of the expansion coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientLaw {
    StandardNormal,
    /// `P{ξ ≥ x} = P{ξ ≤ −x} = exp{−x^α/α}/2`, `α ≥ 2`.
    TwoSidedWeibull {
        alpha: f64,
    },
}

impl CoefficientLaw {
    pub fn two_sided_weibull(alpha: f64) -> Result<Self> {
        if !(alpha >= 2.0 && alpha.is_finite()) {
            return Err(domain!("Weibull coefficients need alpha >= 2, got {alpha}"));
        }
        Ok(CoefficientLaw::TwoSidedWeibull { alpha })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            CoefficientLaw::StandardNormal => rng.sample(StandardNormal),
            CoefficientLaw::TwoSidedWeibull { alpha } => {
                let u = 1.0 - rng.random::<f64>();
                let magnitude = (-alpha * u.ln()).powf(1.0 / alpha);
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
        }
    }

    /// `E ξ²`; `α^{2/α}·Γ(1 + 2/α)` for the Weibull law.
    pub fn second_moment(&self) -> f64 {
        match *self {
            CoefficientLaw::StandardNormal => 1.0,
            CoefficientLaw::TwoSidedWeibull { alpha } => alpha.powf(2.0 / alpha) * libm::tgamma(1.0 + 2.0 / alpha),
        }
    }

    /// Upper tail `P{ξ ≥ x}` for `x > 0`.
    pub fn upper_tail(&self, x: f64) -> f64 {
        match *self {
            CoefficientLaw::StandardNormal => 0.5 * libm::erfc(x / core::f64::consts::SQRT_2),
            CoefficientLaw::TwoSidedWeibull { alpha } => 0.5 * (-x.powf(alpha) / alpha).exp(),
        }
    }

    /// The Orlicz function the coefficients are sub-Gaussian with respect to.
    pub fn orlicz(&self) -> OrliczFunction {
        match *self {
            CoefficientLaw::StandardNormal => OrliczFunction::gaussian(),
            CoefficientLaw::TwoSidedWeibull { alpha } => {
                OrliczFunction::weibull_piecewise(alpha).expect("alpha validated on construction")
            }
        }
    }
}

/// Frequencies `λ_j ≥ 0` and amplitudes `a_j` of a trigonometric expansion.
/// Coefficient `2j` multiplies `a_j cos(λ_j t)`, coefficient `2j + 1`
/// multiplies `a_j sin(λ_j t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigBasis {
    terms: Vec<(f64, f64)>,
}

impl TrigBasis {
    pub fn new(terms: Vec<(f64, f64)>) -> Result<Self> {
        for &(lambda, amp) in &terms {
            if !(lambda >= 0.0 && lambda.is_finite() && amp.is_finite()) {
                return Err(input!("basis term needs finite lambda >= 0 and finite amplitude, got ({lambda}, {amp})"));
            }
        }
        Ok(Self { terms })
    }

    /// Basis of a symmetric discrete spectral measure: `a_j = √(pair mass)`.
    pub fn from_measure(measure: &SpectralMeasure) -> Result<Self> {
        let pairs = measure
            .symmetric_pairs(1e-12)
            .ok_or_else(|| input!("real-valued paths need a symmetric spectral measure"))?;
        Self::new(pairs.into_iter().map(|(l, m)| (l, m.sqrt())).collect())
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    /// Number of random coefficients, `2·terms`.
    pub fn coefficient_count(&self) -> usize {
        2 * self.terms.len()
    }

    pub fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|t| t.0).fold(0.0, f64::max)
    }

    /// Values of all basis functions at `t`, in coefficient order.
    pub fn values_at(&self, t: f64, out: &mut [f64]) {
        for (j, &(lambda, amp)) in self.terms.iter().enumerate() {
            let (s, c) = (lambda * t).sin_cos();
            out[2 * j] = amp * c;
            out[2 * j + 1] = amp * s;
        }
    }

    pub fn eval(&self, coeffs: &[f64], t: f64) -> f64 {
        self.terms
            .iter()
            .enumerate()
            .map(|(j, &(lambda, amp))| {
                let (s, c) = (lambda * t).sin_cos();
                amp * (coeffs[2 * j] * c + coeffs[2 * j + 1] * s)
            })
            .sum()
    }
}

/// Random path model: a basis and a coefficient law.
#[derive(Debug, Clone, PartialEq)]
pub struct PathModel {
    pub basis: TrigBasis,
    pub law: CoefficientLaw,
}

impl PathModel {
    /// Gaussian process with the given symmetric spectral measure.
    pub fn gaussian(measure: &SpectralMeasure) -> Result<Self> {
        Ok(Self { basis: TrigBasis::from_measure(measure)?, law: CoefficientLaw::StandardNormal })
    }

    /// Expansion with i.i.d. two-sided Weibull(α) coefficients.
    pub fn ssub_weibull(basis: TrigBasis, alpha: f64) -> Result<Self> {
        if basis.terms.is_empty() {
            return Err(input!("expansion needs at least one basis function"));
        }
        Ok(Self { basis, law: CoefficientLaw::two_sided_weibull(alpha)? })
    }

    /// `B(τ) = E ξ²·Σ_j a_j² cos(λ_j τ)`.
    pub fn covariance(&self, tau: f64) -> f64 {
        self.law.second_moment() * self.basis.terms.iter().map(|&(l, a)| a * a * (l * tau).cos()).sum::<f64>()
    }

    /// Whether `φ(√x)` is convex for the coefficient law, the condition under
    /// which the expansion is strictly sub-Gaussian. Certification with a
    /// determinative constant is refused otherwise.
    pub fn supports_ssub_certification(&self) -> bool {
        self.law.orlicz().sqrt_composition_is_convex()
    }

    /// Coefficients of trial `trial` under `seed`.
    pub fn draw_coefficients(&self, seed: u64, trial: u64) -> Vec<f64> {
        let mut rng = trial_rng(seed, trial);
        (0..self.basis.coefficient_count()).map(|_| self.law.sample(&mut rng)).collect()
    }
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `points` equally spaced times on `[0, T]`.
pub fn uniform_grid(horizon: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(domain!("grid needs at least 2 points, got {points}"));
    }
    let h = horizon / (points - 1) as f64;
    Ok((0..points).map(|i| if i + 1 == points { horizon } else { h * i as f64 }).collect())
}

/// A simulated path on a grid together with its lattice samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub lattice_samples: LatticeSamples,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(input!("grid must be non-empty and strictly increasing"));
    }
    Ok(())
}

fn path_sample(model: &PathModel, config: &SamplingConfig, grid: &[f64], seed: u64) -> Result<PathSample> {
    check_grid(grid)?;
    let coeffs = model.draw_coefficients(seed, 0);
    let values = grid.iter().map(|&t| model.basis.eval(&coeffs, t)).collect();
    let lattice_samples = LatticeSamples::sample(config, |t| model.basis.eval(&coeffs, t));
    Ok(PathSample { grid: grid.to_vec(), values, lattice_samples })
}

/// One Gaussian path with spectral measure `measure` (stream 0 of `seed`).
pub fn simulate_gaussian(
    measure: &SpectralMeasure,
    config: &SamplingConfig,
    grid: &[f64],
    seed: u64,
) -> Result<PathSample> {
    path_sample(&PathModel::gaussian(measure)?, config, grid, seed)
}

/// One path of the expansion `Σ ξ_j e_j(t)` with two-sided Weibull(α)
/// coefficients (stream 0 of `seed`).
pub fn simulate_ssub_weibull(
    basis: &TrigBasis,
    alpha: f64,
    config: &SamplingConfig,
    grid: &[f64],
    seed: u64,
) -> Result<PathSample> {
    path_sample(&PathModel::ssub_weibull(basis.clone(), alpha)?, config, grid, seed)
}

/// Empirical exceedance frequency of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub exceed_count: u64,
    pub trials: u64,
    pub p_hat: f64,
    /// `√(p̂(1 − p̂)/trials)`.
    pub std_err: f64,
    pub seed: u64,
}

impl TailEstimate {
    /// Counts `metric > eps` over per-trial metric values.
    pub fn from_metrics(metrics: &[f64], eps: f64, seed: u64) -> Result<Self> {
        if metrics.is_empty() {
            return Err(domain!("need at least one trial"));
        }
        let exceed_count = metrics.iter().filter(|&&m| m > eps).count() as u64;
        let trials = metrics.len() as u64;
        let p_hat = exceed_count as f64 / trials as f64;
        Ok(Self { exceed_count, trials, p_hat, std_err: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(), seed })
    }

    /// `p̂ ≤ bound + k·std_err`.
    pub fn dominated_by(&self, bound: f64, k: f64) -> bool {
        self.p_hat <= bound + k * self.std_err
    }
}

/// Error metric of a trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// `∫₀^T |X − X_n|^p dt` by composite Simpson on the grid.
    Lp { p: f64 },
    /// `sup_{[0,T]} |X − X_n|`: grid maximum refined by golden section
    /// around the grid argmax.
    Sup,
}

/// Precomputed Monte Carlo experiment: the truncation residual
/// `X(t) − X_n(t)` is linear in the coefficients, so the residual of every
/// basis function is tabulated once on the grid.
#[derive(Debug, Clone)]
pub struct McPlan {
    model: PathModel,
    config: SamplingConfig,
    metric: Metric,
    grid: Vec<f64>,
    /// `grid.len() × coefficient_count`, row-major.
    residual: Vec<f64>,
    /// `(2n + 1) × coefficient_count`, row-major.
    lattice_basis: Vec<f64>,
}

/// Largest grid spacing accepted, as a fraction of the lattice step `π/ω`.
pub const MIN_POINTS_PER_LOBE: f64 = 8.0;

impl McPlan {
    pub fn new(model: PathModel, config: SamplingConfig, metric: Metric, grid_points: usize) -> Result<Self> {
        if let Metric::Lp { p } = metric {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(domain!("p must be >= 1, got {p}"));
            }
        }
        if model.basis.max_frequency() >= config.omega {
            return Err(input!(
                "basis frequency {} is not below the sampling rate {}",
                model.basis.max_frequency(),
                config.omega
            ));
        }
        let grid = uniform_grid(config.horizon, grid_points)?;
        let spacing = grid[1] - grid[0];
        let max_spacing = PI / (MIN_POINTS_PER_LOBE * config.omega);
        if spacing > max_spacing * (1.0 + 1e-12) {
            return Err(Error::Resolution(alloc::format!(
                "grid spacing {spacing} exceeds pi/(8 omega) = {max_spacing}; use at least {} points",
                (config.horizon / max_spacing).ceil() as usize + 1
            )));
        }
        let m = model.basis.coefficient_count();
        let n = config.n as i64;
        let mut lattice_basis = vec![0.0; (2 * n as usize + 1) * m];
        for (i, k) in (-n..=n).enumerate() {
            model.basis.values_at(config.lattice_time(k), &mut lattice_basis[i * m..(i + 1) * m]);
        }
        let mut residual = vec![0.0; grid.len() * m];
        let mut column = vec![0.0; 2 * n as usize + 1];
        for (g, &t) in grid.iter().enumerate() {
            let row = &mut residual[g * m..(g + 1) * m];
            model.basis.values_at(t, row);
            for j in 0..m {
                for (i, c) in column.iter_mut().enumerate() {
                    *c = lattice_basis[i * m + j];
                }
                row[j] -= truncated_sum_unchecked(&column, config.omega, t);
            }
        }
        Ok(Self { model, config, metric, grid, residual, lattice_basis })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn config(&self) -> &SamplingConfig {
        &self.config
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn model(&self) -> &PathModel {
        &self.model
    }

    /// `X(t) − X_n(t)` on the grid for the given coefficients.
    pub fn residual_on_grid(&self, coeffs: &[f64]) -> Vec<f64> {
        let m = coeffs.len();
        self.residual.chunks_exact(m).map(|row| row.iter().zip(coeffs).map(|(r, c)| r * c).sum()).collect()
    }

    fn lattice_values(&self, coeffs: &[f64]) -> Vec<f64> {
        let m = coeffs.len();
        self.lattice_basis.chunks_exact(m).map(|row| row.iter().zip(coeffs).map(|(r, c)| r * c).sum()).collect()
    }

    /// `X(t) − X_n(t)` at an arbitrary `t`.
    fn residual_at(&self, coeffs: &[f64], lattice: &[f64], t: f64) -> f64 {
        let omega = self.config.omega;
        let wt = omega * t;
        let n = (lattice.len() / 2) as i64;
        let nearest = (wt / PI).round();
        let xn = if (wt - nearest * PI).abs() < SINGULARITY_EPS {
            truncated_sum_unchecked(lattice, omega, t)
        } else {
            // sinc(ωt − kπ) = (−1)^k sin(ωt)/(ωt − kπ)
            let mut acc = 0.0;
            for (i, &v) in lattice.iter().enumerate() {
                let k = i as i64 - n;
                let term = v / (wt - k as f64 * PI);
                acc += if k % 2 == 0 { term } else { -term };
            }
            wt.sin() * acc
        };
        self.model.basis.eval(coeffs, t) - xn
    }

    fn metric_of(&self, coeffs: &[f64]) -> f64 {
        let e = self.residual_on_grid(coeffs);
        match self.metric {
            Metric::Lp { p } => {
                let powered: Vec<f64> = e.iter().map(|v| v.abs().powf(p)).collect();
                simpson_uniform(&powered, self.grid[1] - self.grid[0])
            }
            Metric::Sup => {
                let (i, grid_max) =
                    e.iter()
                        .enumerate()
                        .map(|(i, v)| (i, v.abs()))
                        .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
                let a = self.grid[i.saturating_sub(1)];
                let b = self.grid[(i + 1).min(self.grid.len() - 1)];
                let lattice = self.lattice_values(coeffs);
                let (_, refined) = golden_section_max(
                    |t| self.residual_at(coeffs, &lattice, t).abs(),
                    a,
                    b,
                    1e-12 * self.config.horizon,
                    200,
                );
                refined.max(grid_max)
            }
        }
    }

    /// Metric value of trial `trial` under `seed`.
    pub fn trial_metric(&self, seed: u64, trial: u64) -> f64 {
        self.metric_of(&self.model.draw_coefficients(seed, trial))
    }

    /// Grid maximum and refined maximum of `|X − X_n|` for one trial.
    pub fn sup_refinement(&self, seed: u64, trial: u64) -> (f64, f64) {
        let coeffs = self.model.draw_coefficients(seed, trial);
        let grid_max = self.residual_on_grid(&coeffs).iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let refined = Self { metric: Metric::Sup, ..self.clone() }.metric_of(&coeffs);
        (grid_max, refined)
    }

    /// Runs `trials` trials sequentially, returning the estimate and the
    /// per-trial metric values in trial order.
    pub fn run(&self, eps: f64, trials: u64, seed: u64) -> Result<(TailEstimate, Vec<f64>)> {
        let metrics: Vec<f64> = (0..trials).map(|i| self.trial_metric(seed, i)).collect();
        Ok((TailEstimate::from_metrics(&metrics, eps, seed)?, metrics))
    }
}

/// Empirical `P{∫₀^T |X − X_n|^p dt > ε}`.
pub fn mc_lp_exceedance(
    model: &PathModel,
    config: &SamplingConfig,
    p: f64,
    eps: f64,
    grid_points: usize,
    trials: u64,
    seed: u64,
) -> Result<TailEstimate> {
    let plan = McPlan::new(model.clone(), *config, Metric::Lp { p }, grid_points)?;
    Ok(plan.run(eps, trials, seed)?.0)
}

/// Empirical `P{sup_{[0,T]} |X − X_n| > ε}`.
pub fn mc_uniform_exceedance(
    model: &PathModel,
    config: &SamplingConfig,
    eps: f64,
    grid_points: usize,
    trials: u64,
    seed: u64,
) -> Result<TailEstimate> {
    let plan = McPlan::new(model.clone(), *config, Metric::Sup, grid_points)?;
    Ok(plan.run(eps, trials, seed)?.0)
}

/// Monte Carlo mean of `|X(t) − X_n(t)|²` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Per-trial squared residual `|X(t) − X_n(t)|²` at a single time.
pub fn squared_residuals(model: &PathModel, config: &SamplingConfig, t: f64, trials: u64, seed: u64) -> Vec<f64> {
    let m = model.basis.coefficient_count();
    let n = config.n as i64;
    let mut row = vec![0.0; m];
    model.basis.values_at(t, &mut row);
    let mut lattice = vec![0.0; m];
    let mut column = vec![0.0; (2 * n + 1) as usize];
    let mut basis_at_k = vec![vec![0.0; m]; column.len()];
    for (i, k) in (-n..=n).enumerate() {
        model.basis.values_at(config.lattice_time(k), &mut lattice);
        basis_at_k[i].copy_from_slice(&lattice);
    }
    for j in 0..m {
        for (i, c) in column.iter_mut().enumerate() {
            *c = basis_at_k[i][j];
        }
        row[j] -= truncated_sum_unchecked(&column, config.omega, t);
    }
    (0..trials)
        .map(|i| {
            let c = model.draw_coefficients(seed, i);
            let e: f64 = row.iter().zip(&c).map(|(r, x)| r * x).sum();
            e * e
        })
        .collect()
}

/// Summarizes per-trial values into a mean and its standard error.
pub fn mean_estimate(values: &[f64], seed: u64) -> Result<MeanEstimate> {
    if values.len() < 2 {
        return Err(domain!("need at least two trials"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(MeanEstimate { mean, std_err: (var / n).sqrt(), trials: values.len() as u64, seed })
}

/// Monte Carlo estimate of `E|X(t) − X_n(t)|²`.
pub fn mc_ms_error(model: &PathModel, config: &SamplingConfig, t: f64, trials: u64, seed: u64) -> Result<MeanEstimate> {
    mean_estimate(&squared_residuals(model, config, t, trials, seed), seed)
}
