//! Mean-square truncation bounds for the WKS sum of a stationary process
//! bandlimited to `[−Λ, Λ)`:
//!
//! * `E|X(t) − X_n(t)|² ≤ C_n(t)/n²` ([`c_n`]),
//! * `E(Y_n(t) − Y_n(s))² ≤ ((t − s)/n)²·b_n(t, s)` for `Y_n = X − X_n`
//!   ([`b_n`]),
//! * the classical Belyaev bound ([`belyaev_bound`]).
//!
//! For discrete spectral measures the error is computed exactly
//! ([`exact_ms_error`], [`exact_increment_error`]), which turns every bound
//! into a checkable inequality.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, input};
use crate::sampling::{sinc_weight, SamplingConfig};
use crate::Result;

/// A discrete spectral measure: atoms `(λ_j, mass_j)` on `[−Λ, Λ)`.
///
/// Real-valued processes need a symmetric measure (equal masses at `±λ`).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    atoms: Vec<(f64, f64)>,
    band_edge: f64,
}

impl SpectralMeasure {
    pub fn new(atoms: Vec<(f64, f64)>, band_edge: f64) -> Result<Self> {
        if !(band_edge > 0.0) {
            return Err(domain!("band edge must be positive, got {band_edge}"));
        }
        for &(lambda, mass) in &atoms {
            check_atom(lambda, mass, band_edge)?;
        }
        Ok(Self { atoms, band_edge })
    }

    /// Midpoint discretization of a flat spectral density on `[−Λ, Λ)`
    /// into `2·pairs` atoms with total mass `total_mass`.
    pub fn flat(band_edge: f64, pairs: usize, total_mass: f64) -> Result<Self> {
        Self::from_density(band_edge, pairs, total_mass, |_| 1.0)
    }

    /// Midpoint discretization of an even spectral density `density(λ)` on
    /// `[0, Λ)` with `pairs` cells per half band, normalized to `total_mass`.
    pub fn from_density<D: Fn(f64) -> f64>(band_edge: f64, pairs: usize, total_mass: f64, density: D) -> Result<Self> {
        if pairs == 0 {
            return Err(domain!("need at least one cell"));
        }
        if !(total_mass >= 0.0) {
            return Err(domain!("total mass must be non-negative, got {total_mass}"));
        }
        let h = band_edge / pairs as f64;
        let raw: Vec<(f64, f64)> = (0..pairs)
            .map(|j| {
                let lambda = (j as f64 + 0.5) * h;
                (lambda, density(lambda).max(0.0) * h)
            })
            .collect();
        let norm: f64 = 2.0 * raw.iter().map(|a| a.1).sum::<f64>();
        if !(norm > 0.0) {
            return Err(domain!("density integrates to zero"));
        }
        let mut atoms = Vec::with_capacity(2 * pairs);
        for (lambda, m) in raw {
            let mass = m / norm * total_mass;
            atoms.push((-lambda, mass));
            atoms.push((lambda, mass));
        }
        Self::new(atoms, band_edge)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn band_edge(&self) -> f64 {
        self.band_edge
    }

    /// `B(0)`, the total mass.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `B(τ) = Σ mass_j·cos(τλ_j)` (the real part of the covariance; exact
    /// for symmetric measures).
    pub fn covariance(&self, tau: f64) -> f64 {
        self.atoms.iter().map(|&(l, m)| m * (tau * l).cos()).sum()
    }

    /// Whether every atom `(λ, m)` has a partner `(−λ, m)` within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.symmetric_pairs(tol).is_some()
    }

    /// Collapses `±λ` partners into `(λ ≥ 0, combined mass)`. Atoms at `λ = 0`
    /// stay single. `None` if the measure is not symmetric.
    pub fn symmetric_pairs(&self, tol: f64) -> Option<Vec<(f64, f64)>> {
        let mut pos: Vec<(f64, f64)> = Vec::new();
        let mut neg: Vec<(f64, f64)> = Vec::new();
        let mut zero = 0.0;
        for &(l, m) in &self.atoms {
            if m == 0.0 {
                continue;
            }
            if l.abs() <= tol {
                zero += m;
            } else if l > 0.0 {
                pos.push((l, m));
            } else {
                neg.push((-l, m));
            }
        }
        let by_freq = |a: &(f64, f64), b: &(f64, f64)| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1));
        pos.sort_by(by_freq);
        neg.sort_by(by_freq);
        if pos.len() != neg.len() {
            return None;
        }
        let mut out = Vec::with_capacity(pos.len() + 1);
        if zero > 0.0 {
            out.push((0.0, zero));
        }
        for (p, q) in pos.iter().zip(&neg) {
            if (p.0 - q.0).abs() > tol || (p.1 - q.1).abs() > tol * p.1.max(1.0) {
                return None;
            }
            out.push((p.0, p.1 + q.1));
        }
        Some(out)
    }
}

fn check_atom(lambda: f64, mass: f64, band_edge: f64) -> Result<()> {
    if !(lambda >= -band_edge && lambda < band_edge) {
        return Err(input!("atom at lambda = {lambda} lies outside [-{band_edge}, {band_edge})"));
    }
    if !(mass >= 0.0 && mass.is_finite()) {
        return Err(input!("atom mass must be finite and non-negative, got {mass}"));
    }
    Ok(())
}

/// Constants behind a mean-square bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MsConstants {
    /// Pointwise bound at `t`.
    Point { c_n: f64 },
    /// Increment bound between `t` and `s`.
    Increment { b_n: f64, w_n: f64, q_n: f64 },
}

/// A mean-square bound together with the constants it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsBoundReport {
    /// `C_n(t)/n²` or `((t − s)/n)²·b_n(t, s)`.
    pub bound_value: f64,
    pub constants: MsConstants,
    /// Whether `n ≥ ω·max(t, s)/(π√z)` and `z ∈ (0, 1)`. The bound means
    /// nothing otherwise.
    pub admissible: bool,
    pub z: f64,
    pub n: u64,
}

/// `√(C_n(t)/B(0))`: the pointwise bound on `|Σ_{k>n} R_k(t, λ)|·n`.
fn pointwise_factor(config: &SamplingConfig, t: f64, z: f64) -> f64 {
    let n = config.n as f64;
    4.0 * config.omega * t / (PI * PI * (1.0 - z))
        + 4.0 * (z + 1.0 + 1.0 / n) / (PI * (1.0 - z).powi(2) * config.band_gap())
}

/// `C_n(t) = B(0)·(4ωt/(π²(1−z)) + 4(z+1+1/n)/(π(1−z)²(1−Λ/ω)))²` at an
/// explicit `z`, with no admissibility check.
pub fn c_n_value(config: &SamplingConfig, b0: f64, t: f64, z: f64) -> f64 {
    let s = pointwise_factor(config, t, z);
    b0 * s * s
}

/// Evaluates the pointwise bound and records admissibility instead of
/// failing. `z` defaults to `ω²t²/(π²n²)`.
pub fn evaluate_c_n(config: &SamplingConfig, b0: f64, t: f64) -> MsBoundReport {
    let z = config.z_at(t);
    let c = c_n_value(config, b0, t, z);
    let n = config.n as f64;
    MsBoundReport {
        bound_value: c / (n * n),
        constants: MsConstants::Point { c_n: c },
        admissible: config.check_gate(t, z).is_ok(),
        z,
        n: config.n,
    }
}

/// Pointwise mean-square bound `E|X(t) − X_n(t)|² ≤ C_n(t)/n²`.
///
/// Fails with a gate error unless `z ∈ (0, 1)` and `n ≥ ωt/(π√z)`.
pub fn c_n(config: &SamplingConfig, b0: f64, t: f64) -> Result<MsBoundReport> {
    if !(b0 > 0.0) {
        return Err(domain!("B(0) must be positive, got {b0}"));
    }
    if !(t > 0.0) {
        return Err(domain!("t must be positive, got {t}"));
    }
    config.check_gate(t, config.z_at(t))?;
    Ok(evaluate_c_n(config, b0, t))
}

/// `(W_n, Q_n, b_n)` at explicit `z`.
pub fn b_n_parts(config: &SamplingConfig, b0: f64, t: f64, s: f64, z: f64) -> (f64, f64, f64) {
    let omega = config.omega;
    let n = config.n as f64;
    let pi2 = PI * PI;
    let w =
        4.0 * omega / (pi2 * (1.0 - z)) * (omega * s + 1.0 + omega * omega * (s + t) * s / (pi2 * n * n * (1.0 - z)));
    let q = 2.0 * omega / (PI * (1.0 - z).powi(2)) * (z + 1.0 + 1.0 / n + 2.0 * omega * (s + t) / (n * pi2));
    let inner = w + q / config.band_gap();
    (w, q, b0 * inner * inner)
}

/// Evaluates the increment bound without failing on inadmissible input.
/// `z` defaults to the tight value at `max(t, s)`.
pub fn evaluate_b_n(config: &SamplingConfig, b0: f64, t: f64, s: f64) -> MsBoundReport {
    let tmax = t.max(s);
    let z = config.z_at(tmax);
    let (w, q, b) = b_n_parts(config, b0, t, s, z);
    let n = config.n as f64;
    let scale = (t - s) / n;
    MsBoundReport {
        bound_value: scale * scale * b,
        constants: MsConstants::Increment { b_n: b, w_n: w, q_n: q },
        admissible: config.check_gate(tmax, z).is_ok(),
        z,
        n: config.n,
    }
}

/// Increment bound `E(Y_n(t) − Y_n(s))² ≤ ((t − s)/n)²·b_n(t, s)`.
pub fn b_n(config: &SamplingConfig, b0: f64, t: f64, s: f64) -> Result<MsBoundReport> {
    if !(b0 > 0.0) {
        return Err(domain!("B(0) must be positive, got {b0}"));
    }
    if !(t > 0.0 && s > 0.0) {
        return Err(domain!("t and s must be positive, got t = {t}, s = {s}"));
    }
    let tmax = t.max(s);
    config.check_gate(tmax, config.z_at(tmax))?;
    Ok(evaluate_b_n(config, b0, t, s))
}

/// Belyaev's bound `16ω²(2π + tω)²B(0)/(π⁴n²(1 − Λ/ω)²)`.
pub fn belyaev_bound(config: &SamplingConfig, b0: f64, t: f64) -> f64 {
    let omega = config.omega;
    let n = config.n as f64;
    let a = 2.0 * PI + t * omega;
    16.0 * omega * omega * a * a * b0 / (PI.powi(4) * n * n * config.band_gap().powi(2))
}

/// Sinc weights `sinc_weight(ω, t, k)` for `k = −n..=n`.
fn weights(config: &SamplingConfig, t: f64) -> Vec<f64> {
    let n = config.n as i64;
    (-n..=n).map(|k| sinc_weight(config.omega, t, k)).collect()
}

/// `e^{itλ} − Σ_{|k|≤n} e^{ikπλ/ω}·sinc_weight(ω, t, k)`.
fn residual(config: &SamplingConfig, w: &[f64], t: f64, lambda: f64) -> Complex64 {
    let n = config.n as i64;
    let step = PI * lambda / config.omega;
    let sum: Complex64 =
        w.iter().enumerate().map(|(i, &wk)| Complex64::from_polar(wk, (i as i64 - n) as f64 * step)).sum();
    Complex64::from_polar(1.0, t * lambda) - sum
}

fn check_measure(measure: &SpectralMeasure, config: &SamplingConfig) -> Result<()> {
    for &(lambda, mass) in measure.atoms() {
        check_atom(lambda, mass, config.band_edge)?;
    }
    Ok(())
}

/// Exact mean-square truncation error of a process with a discrete spectral
/// measure: `Σ_j mass_j·|e^{itλ_j} − Σ_{|k|≤n} e^{ikπλ_j/ω}·sinc_weight(ω, t, k)|²`.
///
/// `k_max` is accepted for interface symmetry with series-based oracles and
/// must be at least `n`; the direct form needs only the finite sum.
pub fn exact_ms_error(measure: &SpectralMeasure, config: &SamplingConfig, t: f64, k_max: u64) -> Result<f64> {
    if k_max < config.n {
        return Err(domain!("k_max = {k_max} must be at least n = {}", config.n));
    }
    check_measure(measure, config)?;
    let w = weights(config, t);
    Ok(measure.atoms().iter().map(|&(lambda, mass)| mass * residual(config, &w, t, lambda).norm_sqr()).sum())
}

/// Exact `E(Y_n(t) − Y_n(s))²` for a discrete spectral measure.
pub fn exact_increment_error(measure: &SpectralMeasure, config: &SamplingConfig, t: f64, s: f64) -> Result<f64> {
    check_measure(measure, config)?;
    let wt = weights(config, t);
    let ws = weights(config, s);
    Ok(measure
        .atoms()
        .iter()
        .map(|&(lambda, mass)| mass * (residual(config, &wt, t, lambda) - residual(config, &ws, s, lambda)).norm_sqr())
        .sum())
}
