//! Cardinal-series machinery: sampling configuration, the sinc weights of
//! the WKS expansion, truncated sums over `2n + 1` lattice samples, the
//! residual kernel `R_k(t, λ)`, and the two sine-sum inequalities the
//! mean-square bounds are built on.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, input};
use crate::{Error, Result};

/// Below this distance from a lattice point the sinc singularity is
/// replaced by its Taylor expansion.
pub const SINGULARITY_EPS: f64 = 1e-8;

/// Relative slack granted to the admissibility inequality
/// `n·π·√z ≥ ω·t` so that the tight choice of `z` is not lost to rounding.
pub const GATE_SLACK: f64 = 1e-12;

/// Sampling rate, band edge, horizon and truncation order of a WKS sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    /// Angular sampling rate ω; samples are taken at `kπ/ω`.
    pub omega: f64,
    /// Band edge Λ of the process spectrum, `0 < Λ < ω`.
    pub band_edge: f64,
    /// Horizon T of the approximation interval `[0, T]`.
    pub horizon: f64,
    /// Truncation order n; the sum uses `|k| ≤ n`.
    pub n: u64,
    /// Safety parameter `z ∈ (0, 1)`. `None` selects the tight value.
    pub z: Option<f64>,
}

impl SamplingConfig {
    pub fn new(omega: f64, band_edge: f64, horizon: f64, n: u64) -> Result<Self> {
        if !(band_edge > 0.0 && omega > band_edge && omega.is_finite()) {
            return Err(domain!("need omega > lambda > 0, got omega = {omega}, lambda = {band_edge}"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(domain!("horizon T must be positive, got {horizon}"));
        }
        if n == 0 {
            return Err(domain!("truncation order n must be >= 1"));
        }
        Ok(Self { omega, band_edge, horizon, n, z: None })
    }

    /// Fixes the safety parameter.
    pub fn with_z(mut self, z: f64) -> Result<Self> {
        if !(z > 0.0 && z < 1.0) {
            return Err(domain!("z must lie in (0, 1), got {z}"));
        }
        self.z = Some(z);
        Ok(self)
    }

    pub fn with_n(mut self, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(domain!("truncation order n must be >= 1"));
        }
        self.n = n;
        Ok(self)
    }

    /// `ω²t²/(π²n²)`: the smallest `z` admissible at time `t`.
    pub fn tight_z(&self, t: f64) -> f64 {
        let r = self.omega * t / (PI * self.n as f64);
        r * r
    }

    /// `z* = ω²T²/(n²π²)`.
    pub fn z_star(&self) -> f64 {
        self.tight_z(self.horizon)
    }

    /// The configured `z`, or the tight value at `t`.
    pub fn z_at(&self, t: f64) -> f64 {
        self.z.unwrap_or_else(|| self.tight_z(t))
    }

    /// The configured `z`, or `z*` (tight at the horizon).
    pub fn z_horizon(&self) -> f64 {
        self.z.unwrap_or_else(|| self.z_star())
    }

    /// `1 − Λ/ω`.
    pub fn band_gap(&self) -> f64 {
        1.0 - self.band_edge / self.omega
    }

    /// Checks `z ∈ (0, 1)` and `n ≥ ω·t/(π√z)`.
    pub fn check_gate(&self, t: f64, z: f64) -> Result<()> {
        if !(z > 0.0 && z < 1.0) {
            return Err(Error::Gate { inequality: "0 < z < 1", detail: format!("z = {z}") });
        }
        let lhs = self.n as f64 * PI * z.sqrt();
        let rhs = self.omega * t;
        if lhs < rhs * (1.0 - GATE_SLACK) {
            return Err(Error::Gate {
                inequality: "n >= omega*t/(pi*sqrt(z))",
                detail: format!("n = {}, required n >= {}", self.n, rhs / (PI * z.sqrt())),
            });
        }
        Ok(())
    }

    /// Time of lattice point `k`, `kπ/ω`.
    pub fn lattice_time(&self, k: i64) -> f64 {
        k as f64 * PI / self.omega
    }
}

/// Cardinal weight `sin(ω(t − kπ/ω)) / (ω(t − kπ/ω))`.
///
/// Returns exactly 1 on the lattice point itself.
pub fn sinc_weight(omega: f64, t: f64, k: i64) -> f64 {
    sinc(omega * t - k as f64 * PI)
}

/// `sin(u)/u` with the removable singularity handled analytically.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < SINGULARITY_EPS {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// The `2n + 1` samples `X(kπ/ω)`, `|k| ≤ n`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSamples {
    n: u64,
    values: Vec<f64>,
}

impl LatticeSamples {
    /// Builds from `(k, value)` pairs. Every `|k| ≤ n` must appear exactly once.
    pub fn from_pairs<I>(n: u64, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, f64)>,
    {
        let len = 2 * n as usize + 1;
        let mut values = vec![f64::NAN; len];
        let mut seen = vec![false; len];
        for (k, v) in pairs {
            if k.unsigned_abs() > n {
                return Err(input!("sample index {k} outside [-{n}, {n}]"));
            }
            let idx = (k + n as i64) as usize;
            if seen[idx] {
                return Err(input!("duplicate sample index {k}"));
            }
            seen[idx] = true;
            values[idx] = v;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(input!("missing sample index {}", missing as i64 - n as i64));
        }
        Ok(Self { n, values })
    }

    /// Samples `f(k)` for every `|k| ≤ n`.
    pub fn from_fn<F: FnMut(i64) -> f64>(n: u64, mut f: F) -> Self {
        let values = (-(n as i64)..=n as i64).map(&mut f).collect();
        Self { n, values }
    }

    /// Samples a function of time at the lattice `kπ/ω`.
    pub fn sample<F: FnMut(f64) -> f64>(config: &SamplingConfig, mut f: F) -> Self {
        Self::from_fn(config.n, |k| f(config.lattice_time(k)))
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn get(&self, k: i64) -> Option<f64> {
        if k.unsigned_abs() > self.n {
            None
        } else {
            Some(self.values[(k + self.n as i64) as usize])
        }
    }

    /// Values ordered by `k = −n, …, n`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(k, value)` pairs in increasing `k`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let n = self.n as i64;
        self.values.iter().enumerate().map(move |(i, &v)| (i as i64 - n, v))
    }
}

/// `X_n(t) = Σ_{|k|≤n} sinc_weight(ω, t, k) · X(kπ/ω)`.
pub fn truncated_sum(samples: &LatticeSamples, config: &SamplingConfig, t: f64) -> Result<f64> {
    if samples.n != config.n {
        return Err(input!("sample set has order {} but the configuration asks for n = {}", samples.n, config.n));
    }
    Ok(truncated_sum_unchecked(samples.values(), config.omega, t))
}

/// Same as [`truncated_sum`] on a raw slice ordered `k = −n..=n`.
pub(crate) fn truncated_sum_unchecked(values: &[f64], omega: f64, t: f64) -> f64 {
    let n = (values.len() / 2) as i64;
    values.iter().enumerate().map(|(i, v)| v * sinc_weight(omega, t, i as i64 - n)).sum()
}

/// Residual kernel `R_k(t, λ)`: the `±k` terms of the cardinal expansion of
/// `e^{itλ}` combined into
///
/// `sin(ωt)/((ωt)² − (kπ)²) · [2ωt·cos(kπ(1 − λ/ω)) − 2ikπ·sin(kπ(1 − λ/ω))]`.
///
/// The prefactor is evaluated as `(−1)^k·sinc(ωt − kπ)/(ωt + kπ)`, which is
/// the same quantity without cancellation near `ωt = kπ`.
pub fn residual_kernel(config: &SamplingConfig, t: f64, lambda: f64, k: i64) -> Result<Complex64> {
    if k <= 0 {
        return Err(domain!("residual kernel pairs +k and -k; need k >= 1, got {k}"));
    }
    let omega = config.omega;
    let kpi = k as f64 * PI;
    let wt = omega * t;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let prefactor = sign * sinc(wt - kpi) / (wt + kpi);
    let phase = kpi * (1.0 - lambda / omega);
    Ok(Complex64::new(prefactor * 2.0 * wt * phase.cos(), -prefactor * 2.0 * kpi * phase.sin()))
}

/// Outcome of one of the sine-sum inequality checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

const CHECK_SLACK: f64 = 1e-12;

fn check_nu(nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(domain!("nu must lie in (0, 1], got {nu}"));
    }
    Ok(())
}

/// `|Σ_{k=n}^{m} sin(kπν)| ≤ 1/ν` for `0 ≤ n < m`, `ν ∈ (0, 1]`.
pub fn sine_sum_bound_check(n: u64, m: u64, nu: f64) -> Result<InequalityCheck> {
    check_nu(nu)?;
    if m <= n {
        return Err(domain!("need n < m, got n = {n}, m = {m}"));
    }
    let sum: f64 = (n..=m).map(|k| (k as f64 * PI * nu).sin()).sum();
    let lhs = sum.abs();
    let rhs = 1.0 / nu;
    Ok(InequalityCheck { lhs, rhs, holds: lhs <= rhs + CHECK_SLACK })
}

/// Abel-summation bound
/// `|Σ_{k=n}^{m} a_k sin(kπν)| ≤ (1/ν)(Σ_{k=n}^{m} |a_{k+1} − a_k| + |a_{m+1}|)`.
///
/// `a` holds `a_n, …, a_{m+1}`, so `m = n + a.len() − 2` and `a.len() ≥ 3`.
pub fn abel_sum_bound_check(n: u64, a: &[f64], nu: f64) -> Result<InequalityCheck> {
    check_nu(nu)?;
    if a.len() < 3 {
        return Err(domain!("need a_n..a_(m+1) with m > n, got {} coefficients", a.len()));
    }
    let m_idx = a.len() - 2;
    let sum: f64 = a[..=m_idx].iter().enumerate().map(|(i, ak)| ak * ((n + i as u64) as f64 * PI * nu).sin()).sum();
    let variation: f64 = a.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let lhs = sum.abs();
    let rhs = (variation + a[m_idx + 1].abs()) / nu;
    Ok(InequalityCheck { lhs, rhs, holds: lhs <= rhs + CHECK_SLACK })
}
