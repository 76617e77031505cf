//! Approximation in `L_p([0, T])`: tail bounds for `∫₀^T |X − X_n|^p dt`,
//! accuracy/reliability certificates, and the minimal truncation order.
//!
//! For a strictly φ-sub-Gaussian process with determinative constant `C_X`
//! the scale of the tail bound is
//! `S_{n,p} = (C_X/n)^p ∫₀^T C_n(t)^{p/2} dt`, and
//!
//! `P{∫|X − X_n|^p > ε} ≤ 2·exp{−φ*((ε/S_{n,p})^{1/p})}`
//!
//! whenever `ε > S_{n,p}·(f(p·(S_{n,p}/ε)^{1/p}))^p`.

use alloc::format;
use core::f64::consts::PI;

use crate::error::domain;
use crate::numeric::adaptive_simpson;
use crate::orlicz::OrliczFunction;
use crate::sampling::SamplingConfig;
use crate::{Error, Result};

/// Default search cap for the minimal truncation order.
pub const DEFAULT_N_CAP: u64 = 1_000_000_000;

/// A stationary bandlimited strictly φ-sub-Gaussian process model.
#[derive(Debug, Clone)]
pub struct ProcessSpec {
    /// Variance `B(0)`.
    pub b0: f64,
    /// Band edge Λ.
    pub band_edge: f64,
    /// Determinative constant `C_X`.
    pub c_x: f64,
    pub phi: OrliczFunction,
}

impl ProcessSpec {
    pub fn new(b0: f64, band_edge: f64, c_x: f64, phi: OrliczFunction) -> Result<Self> {
        if !(b0 > 0.0 && b0.is_finite()) {
            return Err(domain!("B(0) must be positive, got {b0}"));
        }
        if !(band_edge > 0.0) {
            return Err(domain!("band edge must be positive, got {band_edge}"));
        }
        if !(c_x > 0.0 && c_x.is_finite()) {
            return Err(domain!("determinative constant must be positive, got {c_x}"));
        }
        Ok(Self { b0, band_edge, c_x, phi })
    }

    /// Centered Gaussian process: `φ(x) = x²/2`, `C_X = 1`.
    pub fn gaussian(b0: f64, band_edge: f64) -> Result<Self> {
        Self::new(b0, band_edge, 1.0, OrliczFunction::gaussian())
    }

    pub fn is_gaussian(&self) -> bool {
        self.phi.is_gaussian() && self.c_x == 1.0
    }

    /// Sampling configuration for this process at rate `omega`.
    pub fn sampling(&self, omega: f64, horizon: f64, n: u64) -> Result<SamplingConfig> {
        SamplingConfig::new(omega, self.band_edge, horizon, n)
    }

    fn check_config(&self, config: &SamplingConfig) -> Result<()> {
        if (config.band_edge - self.band_edge).abs() > 1e-12 * self.band_edge {
            return Err(Error::Input(format!(
                "sampling config band edge {} differs from the process band edge {}",
                config.band_edge, self.band_edge
            )));
        }
        Ok(())
    }
}

/// Outcome of an `L_p` tail computation or certification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpCertificate {
    pub p: f64,
    pub horizon: f64,
    pub eps: f64,
    /// Reliability complement; `None` for a bare tail bound.
    pub delta: Option<f64>,
    pub n: u64,
    pub z: f64,
    pub s_np: f64,
    /// Whether `ε > S_{n,p}·(f(p·(S_{n,p}/ε)^{1/p}))^p`.
    pub threshold_ok: bool,
    /// `2·exp{−φ*((ε/S_{n,p})^{1/p})}`; `None` when the threshold fails.
    pub tail_bound: Option<f64>,
    pub certified: bool,
}

/// Slope and intercept of `√(C_n(t)/B(0)) = A₁t + A₀` at fixed `z`.
pub fn cn_line(config: &SamplingConfig, z: f64) -> (f64, f64) {
    let n = config.n as f64;
    let a1 = 4.0 * config.omega / (PI * PI * (1.0 - z));
    let a0 = 4.0 * (z + 1.0 + 1.0 / n) / (PI * (1.0 - z).powi(2) * config.band_gap());
    (a1, a0)
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(domain!("p must be >= 1, got {p}"));
    }
    Ok(())
}

/// `∫₀^T (A₁t + A₀)^p dt`: the expanded antiderivative for even integer `p`
/// (all terms positive, no cancellation), adaptive Simpson otherwise.
fn line_power_integral(a1: f64, a0: f64, horizon: f64, p: f64) -> Result<f64> {
    let is_even_integer = p.fract() == 0.0 && (p as u64).is_multiple_of(2) && p <= 64.0;
    if is_even_integer {
        let m = p as u32;
        let mut binom = 1.0;
        let mut total = 0.0;
        for j in 0..=m {
            total +=
                binom * a1.powi(j as i32) * a0.powi((m - j) as i32) * horizon.powi(j as i32 + 1) / (j as f64 + 1.0);
            binom = binom * (m - j) as f64 / (j as f64 + 1.0);
        }
        return Ok(total);
    }
    let integrand = |t: f64| (a1 * t + a0).powf(p);
    let scale = horizon * integrand(horizon);
    adaptive_simpson(&integrand, 0.0, horizon, 1e-10 * scale, 40)
}

/// `S_{n,p} = (C_X/n)^p ∫₀^T C_n(t)^{p/2} dt` at `z = config.z` (default
/// `z*`), validated at `t = T`.
pub fn s_np(spec: &ProcessSpec, config: &SamplingConfig, p: f64) -> Result<f64> {
    check_p(p)?;
    spec.check_config(config)?;
    let z = config.z_horizon();
    config.check_gate(config.horizon, z)?;
    s_np_at(spec, config, p, z)
}

fn s_np_at(spec: &ProcessSpec, config: &SamplingConfig, p: f64, z: f64) -> Result<f64> {
    let (a1, a0) = cn_line(config, z);
    let integral = line_power_integral(a1, a0, config.horizon, p)?;
    let n = config.n as f64;
    Ok((spec.c_x / n).powf(p) * spec.b0.powf(0.5 * p) * integral)
}

/// Whether `ε > S·(f(p·(S/ε)^{1/p}))^p`.
pub fn threshold_holds(phi: &OrliczFunction, s: f64, p: f64, eps: f64) -> bool {
    let arg = p * (s / eps).powf(1.0 / p);
    eps > s * phi.density(arg).powf(p)
}

/// Tail bound for `∫₀^T |X − X_n|^p dt > ε`.
///
/// Fails on inadmissible `(n, z)`. A failed threshold is reported through
/// `threshold_ok = false` with no tail claim.
pub fn tail_bound_lp(spec: &ProcessSpec, config: &SamplingConfig, p: f64, eps: f64) -> Result<LpCertificate> {
    if !(eps > 0.0) {
        return Err(domain!("accuracy eps must be positive, got {eps}"));
    }
    let s = s_np(spec, config, p)?;
    let threshold_ok = threshold_holds(&spec.phi, s, p, eps);
    let tail_bound =
        if threshold_ok { Some(2.0 * (-spec.phi.conjugate((eps / s).powf(1.0 / p))?).exp()) } else { None };
    Ok(LpCertificate {
        p,
        horizon: config.horizon,
        eps,
        delta: None,
        n: config.n,
        z: config.z_horizon(),
        s_np: s,
        threshold_ok,
        tail_bound,
        certified: false,
    })
}

/// Certifies accuracy `ε` with reliability `1 − δ` in `L_p([0, T])`:
/// the threshold holds and `exp{−φ*((ε/S_{n,p})^{1/p})} ≤ δ/2`.
pub fn certify_lp(spec: &ProcessSpec, config: &SamplingConfig, p: f64, eps: f64, delta: f64) -> Result<LpCertificate> {
    check_delta(delta)?;
    let mut cert = tail_bound_lp(spec, config, p, eps)?;
    cert.delta = Some(delta);
    cert.certified = cert.threshold_ok && cert.tail_bound.is_some_and(|b| b <= delta);
    Ok(cert)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain!("delta must lie in (0, 1), got {delta}"));
    }
    Ok(())
}

/// Gaussian closed form: `Ŝ < ε / max(p^{p/2}, (2 ln(2/δ))^{p/2})`.
pub fn gaussian_reliability_holds(s_hat: f64, p: f64, eps: f64, delta: f64) -> bool {
    let denom = p.powf(0.5 * p).max((2.0 * (2.0 / delta).ln()).powf(0.5 * p));
    s_hat < eps / denom
}

/// Gaussian tail closed form `2·exp{−(ε/Ŝ)^{2/p}/2}`.
pub fn gaussian_tail(s_hat: f64, p: f64, eps: f64) -> f64 {
    2.0 * (-0.5 * (eps / s_hat).powf(2.0 / p)).exp()
}

/// Smallest truncation order found by a certificate search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinTerms<C> {
    pub n: u64,
    /// `z*(n) = ω²T²/(π²n²)` used at that order.
    pub z: f64,
    pub certificate: C,
}

/// Smallest `n` with `z*(n) < 1`: `⌊ωT/π⌋ + 1`.
pub fn first_admissible_n(omega: f64, horizon: f64) -> u64 {
    (omega * horizon / PI).floor() as u64 + 1
}

/// Doubling then bisection over a predicate that is monotone in `n`.
pub(crate) fn search_min_n<F>(start: u64, cap: u64, mut certified: F) -> Result<u64>
where
    F: FnMut(u64) -> Result<bool>,
{
    if start > cap {
        return Err(Error::Unsatisfiable { cap });
    }
    if certified(start)? {
        return Ok(start);
    }
    let mut lo = start;
    let mut hi = start;
    loop {
        if hi >= cap {
            return Err(Error::Unsatisfiable { cap });
        }
        hi = hi.saturating_mul(2).min(cap);
        if certified(hi)? {
            break;
        }
        lo = hi;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if certified(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Minimal `n` such that [`certify_lp`] passes with `z = z*(n)`.
pub fn min_terms_lp(
    spec: &ProcessSpec,
    omega: f64,
    horizon: f64,
    p: f64,
    eps: f64,
    delta: f64,
    cap: u64,
) -> Result<MinTerms<LpCertificate>> {
    check_p(p)?;
    check_delta(delta)?;
    if !(eps > 0.0) {
        return Err(domain!("accuracy eps must be positive, got {eps}"));
    }
    let base = spec.sampling(omega, horizon, 1)?;
    let at = |n: u64| certify_lp(spec, &base.with_n(n)?, p, eps, delta);
    let n = search_min_n(first_admissible_n(omega, horizon), cap, |n| Ok(at(n)?.certified))?;
    let certificate = at(n)?;
    Ok(MinTerms { n, z: certificate.z, certificate })
}

/// The looser Gaussian sufficient condition
/// `B(0)^{p/2}·T·(A₁T + A₀)^p/n^p ≤ ε/max(p^{p/2}, (2 ln(2/δ))^{p/2})` with
/// `A₀ = 4(z + 2)/(π(1 − z)²(1 − Λ/ω))` and `z = z*(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxedLpBound {
    pub n: u64,
    pub z: f64,
    /// Left-hand side of the sufficient condition.
    pub s_upper: f64,
    pub target: f64,
    pub holds: bool,
}

pub fn relaxed_gaussian_bound(
    b0: f64,
    config: &SamplingConfig,
    p: f64,
    eps: f64,
    delta: f64,
) -> Result<RelaxedLpBound> {
    check_p(p)?;
    check_delta(delta)?;
    let z = config.z_star();
    if !(z < 1.0) {
        return Err(Error::Gate { inequality: "z* = omega^2 T^2/(pi^2 n^2) < 1", detail: format!("z* = {z}") });
    }
    let horizon = config.horizon;
    let a1 = 4.0 * config.omega / (PI * PI * (1.0 - z));
    let a0 = 4.0 * (z + 2.0) / (PI * (1.0 - z).powi(2) * config.band_gap());
    let n = config.n as f64;
    let s_upper = b0.powf(0.5 * p) * horizon * (a1 * horizon + a0).powf(p) / n.powf(p);
    let target = eps / p.powf(0.5 * p).max((2.0 * (2.0 / delta).ln()).powf(0.5 * p));
    Ok(RelaxedLpBound { n: config.n, z, s_upper, target, holds: s_upper <= target })
}

/// Minimal `n` satisfying the relaxed Gaussian condition.
#[allow(clippy::too_many_arguments)]
pub fn min_terms_lp_relaxed(
    b0: f64,
    band_edge: f64,
    omega: f64,
    horizon: f64,
    p: f64,
    eps: f64,
    delta: f64,
    cap: u64,
) -> Result<MinTerms<RelaxedLpBound>> {
    let base = SamplingConfig::new(omega, band_edge, horizon, 1)?;
    let at = |n: u64| relaxed_gaussian_bound(b0, &base.with_n(n)?, p, eps, delta);
    let n = search_min_n(first_admissible_n(omega, horizon), cap, |n| Ok(at(n)?.holds))?;
    let certificate = at(n)?;
    Ok(MinTerms { n, z: certificate.z, certificate })
}
