//! Uniform approximation on `[0, T]` via metric entropy.
//!
//! The general bound: for a separable process on a compact index set with
//! `sup τ_φ(X(t)) ≤ ε₀`, a weight `r` and the entropy integral
//! `I_r(v) = ∫₀^v r(N(u)) du`,
//!
//! `P{sup |X(t)| ≥ u} ≤ 2·exp{−φ*(u(1 − θ)/ε₀)}·r⁻¹(I_r(θε₀)/(θε₀))`.
//!
//! Applied to `Y_n = X − X_n` it yields the WKS bound
//! `exp{−φ*(ε(1 − θ)/C_n)}·(e·T·C_X·√b_n/(2nθC_n) + 1)` with
//! `C_n = (C_X B(0)/n)·(A₁T + A₀)²` and `b_n = b_n(T, T)` at `z*`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::E;
use core::fmt;

use crate::error::{domain, input};
use crate::lp_approx::{cn_line, first_admissible_n, MinTerms, ProcessSpec};
use crate::ms_bounds::b_n_parts;
use crate::numeric::{adaptive_simpson, golden_section_max};
use crate::orlicz::OrliczFunction;
use crate::sampling::SamplingConfig;
use crate::{Error, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Weight `r` on `[1, ∞)` with its inverse.
#[derive(Clone)]
pub enum Weight {
    /// `r(v) = (v − 1)^β`, `r⁻¹(y) = y^{1/β} + 1`.
    ShiftedPower {
        beta: f64,
    },
    Custom {
        name: &'static str,
        r: RealFn,
        inverse: RealFn,
    },
}

impl Weight {
    pub fn shifted_power(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(domain!("weight exponent beta must be positive, got {beta}"));
        }
        Ok(Weight::ShiftedPower { beta })
    }

    pub fn custom<R, I>(name: &'static str, r: R, inverse: I) -> Self
    where
        R: Fn(f64) -> f64 + Send + Sync + 'static,
        I: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Weight::Custom { name, r: Arc::new(r), inverse: Arc::new(inverse) }
    }

    pub fn eval(&self, v: f64) -> f64 {
        match self {
            Weight::ShiftedPower { beta } => (v - 1.0).max(0.0).powf(*beta),
            Weight::Custom { r, .. } => r(v),
        }
    }

    pub fn inverse(&self, y: f64) -> f64 {
        match self {
            Weight::ShiftedPower { beta } => y.powf(1.0 / beta) + 1.0,
            Weight::Custom { inverse, .. } => inverse(y),
        }
    }

    /// Midpoint convexity of `x ↦ r(e^x)` on a grid over `[x_min, x_min + 20]`.
    pub fn is_exp_convex(&self, x_min: f64) -> bool {
        let h = 0.05;
        (1..400).all(|i| {
            let x = x_min + h * i as f64;
            let l = self.eval((x - h).exp());
            let m = self.eval(x.exp());
            let r = self.eval((x + h).exp());
            2.0 * m <= (l + r) * (1.0 + 1e-12)
        })
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::ShiftedPower { beta } => write!(f, "ShiftedPower {{ beta: {beta} }}"),
            Weight::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Modulus of continuity `σ` of the pseudometric in `|t − s|`, with inverse.
#[derive(Clone)]
pub enum Modulus {
    /// `σ(h) = C·h^κ`.
    Power {
        c: f64,
        kappa: f64,
    },
    Custom {
        name: &'static str,
        sigma: RealFn,
        inverse: RealFn,
    },
}

impl Modulus {
    pub fn power(c: f64, kappa: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(domain!("modulus constant must be positive, got {c}"));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(domain!("modulus exponent kappa must be positive, got {kappa}"));
        }
        Ok(Modulus::Power { c, kappa })
    }

    pub fn custom<S, I>(name: &'static str, sigma: S, inverse: I) -> Self
    where
        S: Fn(f64) -> f64 + Send + Sync + 'static,
        I: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Modulus::Custom { name, sigma: Arc::new(sigma), inverse: Arc::new(inverse) }
    }

    pub fn sigma(&self, h: f64) -> f64 {
        match self {
            Modulus::Power { c, kappa } => c * h.powf(*kappa),
            Modulus::Custom { sigma, .. } => sigma(h),
        }
    }

    pub fn inverse(&self, u: f64) -> f64 {
        match self {
            Modulus::Power { c, kappa } => (u / c).powf(1.0 / kappa),
            Modulus::Custom { inverse, .. } => inverse(u),
        }
    }
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulus::Power { c, kappa } => write!(f, "Power {{ c: {c}, kappa: {kappa} }}"),
            Modulus::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Covering numbers `N(v)` of the index set.
#[derive(Clone)]
pub enum Massiveness {
    Explicit(RealFn),
    /// `N(u) ≤ T/(2σ⁻¹(u)) + 1` for an interval `[0, T]`.
    FromModulus {
        modulus: Modulus,
        horizon: f64,
    },
}

impl Massiveness {
    pub fn explicit<F>(n: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Massiveness::Explicit(Arc::new(n))
    }

    pub fn from_modulus(modulus: Modulus, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(domain!("horizon must be positive, got {horizon}"));
        }
        Ok(Massiveness::FromModulus { modulus, horizon })
    }

    pub fn eval(&self, v: f64) -> f64 {
        match self {
            Massiveness::Explicit(n) => n(v),
            Massiveness::FromModulus { modulus, horizon } => horizon / (2.0 * modulus.inverse(v)) + 1.0,
        }
    }
}

impl fmt::Debug for Massiveness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Massiveness::Explicit(_) => f.write_str("Explicit(..)"),
            Massiveness::FromModulus { modulus, horizon } => {
                f.debug_struct("FromModulus").field("modulus", modulus).field("horizon", horizon).finish()
            }
        }
    }
}

/// Entropy data of an index set: `ε₀`, covering numbers and weight.
#[derive(Debug, Clone)]
pub struct EntropyModel {
    pub eps0: f64,
    pub massiveness: Massiveness,
    pub weight: Weight,
}

impl EntropyModel {
    pub fn new(eps0: f64, massiveness: Massiveness, weight: Weight) -> Result<Self> {
        if !(eps0 > 0.0 && eps0.is_finite()) {
            return Err(domain!("eps0 must be positive, got {eps0}"));
        }
        Ok(Self { eps0, massiveness, weight })
    }

    /// Checks the structural hypotheses on a log grid over `(0, ε₀]`:
    /// `N ≥ 1` and non-increasing, `r` non-negative and non-decreasing on
    /// `[1, ∞)`, and (when built from a modulus) `σ` increasing with
    /// `σ(0) = 0`.
    pub fn validate(&self) -> Result<()> {
        let grid: Vec<f64> = (0..=200).map(|i| self.eps0 * 10f64.powf(-8.0 * (1.0 - i as f64 / 200.0))).collect();
        let mut prev = f64::INFINITY;
        for &v in &grid {
            let n = self.massiveness.eval(v);
            if !(n >= 1.0) {
                return Err(input!("covering number N({v}) = {n} is below 1"));
            }
            if n > prev * (1.0 + 1e-12) {
                return Err(input!("covering number increases at v = {v}"));
            }
            prev = n;
        }
        let mut prev_r = 0.0;
        for i in 0..=200 {
            let v = 1.0 + 10f64.powf(-4.0 + 10.0 * i as f64 / 200.0);
            let r = self.weight.eval(v);
            if !(r >= 0.0) || r < prev_r * (1.0 - 1e-12) {
                return Err(input!("weight is negative or decreasing at v = {v}"));
            }
            prev_r = r;
        }
        if let Massiveness::FromModulus { modulus, horizon } = &self.massiveness {
            if modulus.sigma(0.0) != 0.0 {
                return Err(input!("modulus must vanish at 0"));
            }
            let mut prev_s = 0.0;
            for i in 1..=200 {
                let s = modulus.sigma(horizon * i as f64 / 200.0);
                if !(s > prev_s) {
                    return Err(input!("modulus is not increasing"));
                }
                prev_s = s;
            }
        }
        Ok(())
    }

    /// Integrand `r(N(u))` of the entropy integral.
    pub fn integrand(&self, u: f64) -> f64 {
        self.weight.eval(self.massiveness.eval(u))
    }
}

/// Maximum number of dyadic pieces before an integral is declared divergent.
const MAX_HALVINGS: usize = 1000;

/// `I_r(v) = ∫₀^v r(N(u)) du`.
///
/// Integrates over `[v/2, v], [v/4, v/2], …` with adaptive Simpson on each
/// piece, stopping once pieces drop below `1e−12` of the running total and
/// adding a geometric estimate of the remainder. Fails with
/// [`Error::Divergence`] when the pieces do not die out.
pub fn entropy_integral(model: &EntropyModel, v: f64) -> Result<f64> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(domain!("upper limit must be non-negative, got {v}"));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    let f = |u: f64| model.integrand(u);
    let mut total = 0.0;
    let mut prev_piece = f64::NAN;
    let mut small_run = 0;
    let mut growing_run = 0;
    let mut hi = v;
    for k in 0..MAX_HALVINGS {
        let lo = 0.5 * hi;
        if lo < f64::MIN_POSITIVE {
            break;
        }
        let scale = (hi - lo) * f(0.5 * (lo + hi)).abs();
        if !scale.is_finite() {
            return Err(Error::Divergence(format!("integrand is not finite near u = {lo:e}")));
        }
        let piece = if scale == 0.0 && f(lo) == 0.0 && f(hi) == 0.0 {
            0.0
        } else {
            adaptive_simpson(&f, lo, hi, 1e-13 * scale.max(f64::MIN_POSITIVE), 24)
                .map_err(|e| Error::Divergence(format!("piece [{lo:e}, {hi:e}]: {e}")))?
        };
        total += piece;
        if !total.is_finite() {
            return Err(Error::Divergence(format!("integral overflows near u = {lo:e}")));
        }
        if piece > prev_piece * (1.0 + 1e-9) {
            growing_run += 1;
            if growing_run >= 60 {
                return Err(Error::Divergence(format!("dyadic pieces grow towards 0 (at u = {lo:e})")));
            }
        } else {
            growing_run = 0;
        }
        if total > 0.0 && piece <= 1e-12 * total {
            small_run += 1;
            if small_run >= 3 {
                let ratio = if prev_piece > 0.0 { piece / prev_piece } else { 0.0 };
                if ratio < 1.0 {
                    total += piece * ratio / (1.0 - ratio);
                }
                return Ok(total);
            }
        } else {
            small_run = 0;
        }
        if total == 0.0 && k >= 200 {
            return Ok(0.0);
        }
        prev_piece = piece;
        hi = lo;
    }
    Err(Error::Divergence(format!("entropy integral on [0, {v}] did not stabilize")))
}

/// Closed form of `Ĩ_r(v)` for `σ(h) = Ch^κ` and `r(v) = (v − 1)^β`, `β < κ`:
/// `(C^{1/κ}T/2)^β·(1 − β/κ)⁻¹·v^{1−β/κ}`.
pub fn power_entropy_integral(c: f64, kappa: f64, beta: f64, horizon: f64, v: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < kappa) {
        return Err(domain!("closed form needs 0 < beta < kappa, got beta = {beta}, kappa = {kappa}"));
    }
    let a = c.powf(1.0 / kappa) * horizon / 2.0;
    Ok(a.powf(beta) / (1.0 - beta / kappa) * v.powf(1.0 - beta / kappa))
}

/// Entropy factor `r⁻¹(Ĩ_r(θε₀)/(θε₀))` of the power family:
/// `(C^{1/κ}T/2)·(1 − β/κ)^{−1/β}·(θε₀)^{−1/κ} + 1`.
pub fn power_entropy_factor(c: f64, kappa: f64, beta: f64, horizon: f64, theta_eps0: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < kappa) {
        return Err(domain!("need 0 < beta < kappa, got beta = {beta}, kappa = {kappa}"));
    }
    let a = c.powf(1.0 / kappa) * horizon / 2.0;
    Ok(a * (1.0 - beta / kappa).powf(-1.0 / beta) * theta_eps0.powf(-1.0 / kappa) + 1.0)
}

/// Limit of [`power_entropy_factor`] as `β → 0`: `(T/2)·(eC/(θε₀))^{1/κ} + 1`.
pub fn power_entropy_factor_limit(c: f64, kappa: f64, horizon: f64, theta_eps0: f64) -> f64 {
    horizon / 2.0 * (E * c / theta_eps0).powf(1.0 / kappa) + 1.0
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(domain!("theta must lie in (0, 1), got {theta}"));
    }
    Ok(())
}

/// `r⁻¹(I_r(θε₀)/(θε₀))`.
pub fn entropy_factor(model: &EntropyModel, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let v = theta * model.eps0;
    Ok(model.weight.inverse(entropy_integral(model, v)? / v))
}

/// `2·A(θ, u) = 2·exp{−φ*(u(1 − θ)/ε₀)}·r⁻¹(I_r(θε₀)/(θε₀))`, a bound on
/// `P{sup |X(t)| ≥ u}`.
pub fn uniform_tail_general(model: &EntropyModel, phi: &OrliczFunction, theta: f64, u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(domain!("level u must be non-negative, got {u}"));
    }
    let factor = entropy_factor(model, theta)?;
    Ok(2.0 * (-phi.conjugate(u * (1.0 - theta) / model.eps0)?).exp() * factor)
}

/// `Q(λ, θ) = exp{φ(λε₀/(1 − θ))}·r⁻¹(I_r(θε₀)/(θε₀))`, with
/// `E exp{λ sup |X(t)|} ≤ 2Q(λ, θ)`.
pub fn uniform_moment_factor(model: &EntropyModel, phi: &OrliczFunction, lambda: f64, theta: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(domain!("lambda must be non-negative, got {lambda}"));
    }
    let factor = entropy_factor(model, theta)?;
    Ok(phi.evaluate(lambda * model.eps0 / (1.0 - theta)).exp() * factor)
}

/// How `θ ∈ (0, 1)` is chosen for the uniform WKS bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaStrategy {
    Fixed(f64),
    /// `θ = C_n/ε`, which needs `ε > C_n`.
    ClosedForm,
    /// Minimizes the bound over `θ`.
    Optimize,
}

impl fmt::Display for ThetaStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaStrategy::Fixed(t) => write!(f, "fixed:{t}"),
            ThetaStrategy::ClosedForm => f.write_str("closed-form"),
            ThetaStrategy::Optimize => f.write_str("optimize"),
        }
    }
}

impl core::str::FromStr for ThetaStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "closed-form" => Ok(ThetaStrategy::ClosedForm),
            "optimize" => Ok(ThetaStrategy::Optimize),
            other => {
                let v = other.strip_prefix("fixed:").unwrap_or(other);
                let theta: f64 = v
                    .parse()
                    .map_err(|_| input!("unknown theta strategy '{s}' (closed-form | optimize | fixed:<theta>)"))?;
                check_theta(theta)?;
                Ok(ThetaStrategy::Fixed(theta))
            }
        }
    }
}

/// Uniform WKS bound with its constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformCertificate {
    pub eps: f64,
    pub delta: Option<f64>,
    pub n: u64,
    pub z: f64,
    /// `None` when the strategy could not produce an admissible `θ`.
    pub theta: Option<f64>,
    pub c_n: f64,
    pub b_n: f64,
    /// Bound with the leading factor 2; `None` without an admissible `θ`.
    pub bound: Option<f64>,
    /// The same bound without the leading 2.
    pub bound_unscaled: Option<f64>,
    /// `C_X·√B(0)·(A₁T + A₀)/n`, the direct estimate of
    /// `sup_t τ_φ(X(t) − X_n(t))`.
    pub eps0_direct: f64,
    /// Set when `eps0_direct > C_n`, i.e. `C_n` does not dominate the direct
    /// estimate.
    pub eps0_exceeds_cn: bool,
    pub certified: bool,
}

/// `(C_n, b_n, eps0_direct)` of the uniform bound.
fn wks_constants(spec: &ProcessSpec, config: &SamplingConfig) -> Result<(f64, f64, f64, f64)> {
    if (config.band_edge - spec.band_edge).abs() > 1e-12 * spec.band_edge {
        return Err(input!(
            "sampling config band edge {} differs from the process band edge {}",
            config.band_edge,
            spec.band_edge
        ));
    }
    let z = config.z_horizon();
    config.check_gate(config.horizon, z)?;
    let n = config.n as f64;
    let (a1, a0) = cn_line(config, z);
    let s = a1 * config.horizon + a0;
    let c_n = spec.c_x * spec.b0 / n * s * s;
    let (_, _, b_n) = b_n_parts(config, spec.b0, config.horizon, config.horizon, z);
    let eps0_direct = spec.c_x * spec.b0.sqrt() * s / n;
    Ok((z, c_n, b_n, eps0_direct))
}

/// `exp{−φ*(ε(1 − θ)/C_n)}·(e·T·C_X·√b_n/(2nθC_n) + 1)`.
fn unscaled_bound(
    spec: &ProcessSpec,
    config: &SamplingConfig,
    c_n: f64,
    b_n: f64,
    eps: f64,
    theta: f64,
) -> Result<f64> {
    let n = config.n as f64;
    let entropy = E * config.horizon * spec.c_x * b_n.sqrt() / (2.0 * n * theta * c_n) + 1.0;
    Ok((-spec.phi.conjugate(eps * (1.0 - theta) / c_n)?).exp() * entropy)
}

/// Uniform WKS bound at a fixed `θ`: a bound on
/// `P{sup_{[0,T]} |X(t) − X_n(t)| > ε}`.
pub fn uniform_tail_wks(
    spec: &ProcessSpec,
    config: &SamplingConfig,
    theta: f64,
    eps: f64,
) -> Result<UniformCertificate> {
    check_theta(theta)?;
    if !(eps > 0.0) {
        return Err(domain!("accuracy eps must be positive, got {eps}"));
    }
    let (z, c_n, b_n, eps0_direct) = wks_constants(spec, config)?;
    let b = unscaled_bound(spec, config, c_n, b_n, eps, theta)?;
    Ok(UniformCertificate {
        eps,
        delta: None,
        n: config.n,
        z,
        theta: Some(theta),
        c_n,
        b_n,
        bound: Some(2.0 * b),
        bound_unscaled: Some(b),
        eps0_direct,
        eps0_exceeds_cn: eps0_direct > c_n,
        certified: false,
    })
}

const THETA_LO: f64 = 1e-6;
const THETA_HI: f64 = 1.0 - 1e-6;

fn optimal_theta(spec: &ProcessSpec, config: &SamplingConfig, c_n: f64, b_n: f64, eps: f64) -> Result<f64> {
    let log_bound =
        |theta: f64| -> f64 { unscaled_bound(spec, config, c_n, b_n, eps, theta).map_or(f64::INFINITY, |b| b.ln()) };
    let grid = 64;
    let h = (THETA_HI - THETA_LO) / (grid - 1) as f64;
    let (best_i, _) = (0..grid).map(|i| (i, log_bound(THETA_LO + h * i as f64))).fold((0, f64::INFINITY), |acc, x| {
        if x.1 < acc.1 {
            x
        } else {
            acc
        }
    });
    let a = (THETA_LO + h * (best_i as f64 - 1.0)).max(THETA_LO);
    let b = (THETA_LO + h * (best_i as f64 + 1.0)).min(THETA_HI);
    let (theta, _) = golden_section_max(|t| -log_bound(t), a, b, 1e-6, 200);
    let mut best = theta;
    let closed = c_n / eps;
    if closed > THETA_LO && closed < THETA_HI && log_bound(closed) < log_bound(best) {
        best = closed;
    }
    Ok(best)
}

/// Uniform WKS bound with `θ` chosen by `strategy`.
///
/// The closed-form strategy needs `ε > C_n`; without it the result carries no `θ`
/// and no bound.
pub fn uniform_bound(
    spec: &ProcessSpec,
    config: &SamplingConfig,
    eps: f64,
    strategy: ThetaStrategy,
) -> Result<UniformCertificate> {
    if !(eps > 0.0) {
        return Err(domain!("accuracy eps must be positive, got {eps}"));
    }
    let (z, c_n, b_n, eps0_direct) = wks_constants(spec, config)?;
    let theta = match strategy {
        ThetaStrategy::Fixed(t) => {
            check_theta(t)?;
            Some(t)
        }
        ThetaStrategy::ClosedForm => (eps > c_n).then_some(c_n / eps),
        ThetaStrategy::Optimize => Some(optimal_theta(spec, config, c_n, b_n, eps)?),
    };
    let mut cert = UniformCertificate {
        eps,
        delta: None,
        n: config.n,
        z,
        theta,
        c_n,
        b_n,
        bound: None,
        bound_unscaled: None,
        eps0_direct,
        eps0_exceeds_cn: eps0_direct > c_n,
        certified: false,
    };
    if let Some(theta) = theta {
        let b = unscaled_bound(spec, config, c_n, b_n, eps, theta)?;
        cert.bound = Some(2.0 * b);
        cert.bound_unscaled = Some(b);
    }
    Ok(cert)
}

/// Certifies `P{sup_{[0,T]} |X − X_n| > ε} ≤ δ` with the uniform WKS bound
/// (leading factor 2 included). The closed-form strategy certifies on a strict
/// inequality, as its closed form is stated.
pub fn certify_uniform(
    spec: &ProcessSpec,
    config: &SamplingConfig,
    eps: f64,
    delta: f64,
    strategy: ThetaStrategy,
) -> Result<UniformCertificate> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain!("delta must lie in (0, 1), got {delta}"));
    }
    let mut cert = uniform_bound(spec, config, eps, strategy)?;
    cert.delta = Some(delta);
    cert.certified = match (strategy, cert.bound) {
        (ThetaStrategy::ClosedForm, Some(b)) => b < delta,
        (_, Some(b)) => b <= delta,
        (_, None) => false,
    };
    Ok(cert)
}

/// Minimal `n` with `z*(n) < 1` certified by [`certify_uniform`].
///
/// Doubles `n` until certified, then bisects. If the bound is seen to rise
/// between doubling points the predicate is not trusted to be monotone and
/// a linear scan is used instead.
pub fn min_terms_uniform(
    spec: &ProcessSpec,
    omega: f64,
    horizon: f64,
    eps: f64,
    delta: f64,
    strategy: ThetaStrategy,
    cap: u64,
) -> Result<MinTerms<UniformCertificate>> {
    let base = spec.sampling(omega, horizon, 1)?;
    let at = |n: u64| certify_uniform(spec, &base.with_n(n)?, eps, delta, strategy);
    let start = first_admissible_n(omega, horizon);
    if start > cap {
        return Err(Error::Unsatisfiable { cap });
    }
    let first = at(start)?;
    if first.certified {
        return Ok(MinTerms { n: start, z: first.z, certificate: first });
    }
    let mut monotone = true;
    let mut prev_bound = first.bound.unwrap_or(f64::INFINITY);
    let mut lo = start;
    let mut hi = start;
    let found = loop {
        if hi >= cap {
            return Err(Error::Unsatisfiable { cap });
        }
        hi = hi.saturating_mul(2).min(cap);
        let cert = at(hi)?;
        let b = cert.bound.unwrap_or(f64::INFINITY);
        if b > prev_bound {
            monotone = false;
        }
        prev_bound = b;
        if cert.certified {
            break cert;
        }
        lo = hi;
    };
    if !monotone {
        for n in start + 1..hi {
            let cert = at(n)?;
            if cert.certified {
                return Ok(MinTerms { n, z: cert.z, certificate: cert });
            }
        }
        return Ok(MinTerms { n: hi, z: found.z, certificate: found });
    }
    let mut best = found;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let cert = at(mid)?;
        if cert.certified {
            hi = mid;
            best = cert;
        } else {
            lo = mid;
        }
    }
    Ok(MinTerms { n: hi, z: best.z, certificate: best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use approx::assert_relative_eq;

    fn gauss() -> ProcessSpec {
        ProcessSpec::gaussian(1.0, 0.75).unwrap()
    }

    fn power_model(c: f64, kappa: f64, beta: f64, horizon: f64, eps0: f64) -> EntropyModel {
        let m = Massiveness::from_modulus(Modulus::power(c, kappa).unwrap(), horizon).unwrap();
        EntropyModel::new(eps0, m, Weight::shifted_power(beta).unwrap()).unwrap()
    }

    #[test]
    fn entropy_integral_matches_closed_form() {
        for &(c, kappa, beta, horizon, v) in &[
            (1.0, 1.0, 0.5, 1.0, 0.7),
            (2.0, 0.5, 0.25, 3.0, 1.3),
            (0.3, 1.0, 0.9, 2.0, 5.0),
            (1.0, 0.8, 0.1, 1.0, 1e-3),
        ] {
            let model = power_model(c, kappa, beta, horizon, 1.0);
            let numeric = entropy_integral(&model, v).unwrap();
            let closed = power_entropy_integral(c, kappa, beta, horizon, v).unwrap();
            assert_relative_eq!(numeric, closed, max_relative = 1e-9);
        }
    }

    #[test]
    fn entropy_integral_trivial_cases() {
        let model = power_model(1.0, 1.0, 0.5, 1.0, 1.0);
        assert_eq!(entropy_integral(&model, 0.0).unwrap(), 0.0);
        assert!(entropy_integral(&model, 1e-12).unwrap() < 1e-5);
        let single =
            EntropyModel::new(1.0, Massiveness::explicit(|_| 1.0), Weight::shifted_power(0.5).unwrap()).unwrap();
        assert_eq!(entropy_integral(&single, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn entropy_integral_detects_divergence() {
        // beta = kappa gives an integrand ~ 1/u
        let model = power_model(1.0, 0.5, 0.5, 1.0, 1.0);
        assert!(matches!(entropy_integral(&model, 1.0), Err(Error::Divergence(_))));
        let model = power_model(1.0, 0.5, 0.8, 1.0, 1.0);
        assert!(matches!(entropy_integral(&model, 1.0), Err(Error::Divergence(_))));
    }

    #[test]
    fn general_tail_structure() {
        let model = power_model(1.0, 1.0, 0.5, 1.0, 0.8);
        let phi = OrliczFunction::gaussian();
        let at_zero = uniform_tail_general(&model, &phi, 0.4, 0.0).unwrap();
        assert!(at_zero >= 2.0);
        assert_relative_eq!(at_zero, 2.0 * entropy_factor(&model, 0.4).unwrap(), max_relative = 1e-15);
        let mut prev = at_zero;
        for i in 1..60 {
            let b = uniform_tail_general(&model, &phi, 0.4, 0.25 * i as f64).unwrap();
            assert!(b <= prev);
            prev = b;
        }
        assert!(prev < 1e-10);
    }

    #[test]
    fn power_family_exponential_factor() {
        let alpha: f64 = 1.5;
        let gamma = alpha / (alpha - 1.0);
        let model = power_model(2.0, 1.0, 0.5, 1.0, 0.9);
        let phi = OrliczFunction::power(alpha).unwrap();
        let (theta, eps): (f64, f64) = (0.3, 4.0);
        let closed = (-(eps * (1.0 - theta) / 0.9).powf(gamma) / gamma).exp();
        let expected = 2.0 * closed * entropy_factor(&model, theta).unwrap();
        assert_relative_eq!(uniform_tail_general(&model, &phi, theta, eps).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn moment_factor_structure() {
        let model = power_model(1.0, 1.0, 0.5, 1.0, 0.8);
        let phi = OrliczFunction::gaussian();
        let q0 = uniform_moment_factor(&model, &phi, 0.0, 0.5).unwrap();
        assert_relative_eq!(q0, entropy_factor(&model, 0.5).unwrap(), max_relative = 1e-15);
        let q = uniform_moment_factor(&model, &phi, 1.2, 0.5).unwrap();
        assert_relative_eq!(q / q0, (0.5f64 * (1.2f64 * 0.8 / 0.5).powi(2)).exp(), max_relative = 1e-12);
    }

    #[test]
    fn power_factor_matches_general_machinery() {
        let (c, kappa, beta, horizon, eps0, theta) = (1.5, 1.0, 0.5, 2.0, 0.7, 0.35);
        let model = power_model(c, kappa, beta, horizon, eps0);
        let general = entropy_factor(&model, theta).unwrap();
        let closed = power_entropy_factor(c, kappa, beta, horizon, theta * eps0).unwrap();
        assert_relative_eq!(general, closed, max_relative = 1e-8);
    }

    #[test]
    fn beta_limit_is_approached_from_above() {
        let (c, kappa, horizon, v) = (1.0, 1.0, 1.0, 0.3);
        let limit = power_entropy_factor_limit(c, kappa, horizon, v);
        let mut prev = f64::INFINITY;
        for beta in [0.9, 0.5, 0.25, 0.1, 0.01, 1e-4] {
            let f = power_entropy_factor(c, kappa, beta, horizon, v).unwrap();
            assert!(f >= limit && f <= prev);
            prev = f;
        }
        assert_relative_eq!(prev, limit, max_relative = 1e-3);
    }

    #[test]
    fn validation_catches_bad_models() {
        assert!(power_model(1.0, 1.0, 0.5, 1.0, 1.0).validate().is_ok());
        let growing =
            EntropyModel::new(1.0, Massiveness::explicit(|v| 1.0 + v), Weight::shifted_power(0.5).unwrap()).unwrap();
        assert!(growing.validate().is_err());
        let below =
            EntropyModel::new(1.0, Massiveness::explicit(|_| 0.5), Weight::shifted_power(0.5).unwrap()).unwrap();
        assert!(below.validate().is_err());
        let bad_weight = Weight::custom("decreasing", |v| 1.0 / v, |y| 1.0 / y);
        let m = EntropyModel::new(1.0, Massiveness::explicit(|v| 1.0 / v + 1.0), bad_weight).unwrap();
        assert!(m.validate().is_err());
    }

    #[test]
    fn exp_convexity_of_shifted_power() {
        // (e^x − 1)^β is convex in x exactly where β·e^x ≥ 1
        assert!(Weight::shifted_power(1.0).unwrap().is_exp_convex(1.0));
        assert!(Weight::shifted_power(0.5).unwrap().is_exp_convex(1.0));
        assert!(!Weight::shifted_power(0.1).unwrap().is_exp_convex(1.0));
        assert!(Weight::shifted_power(0.1).unwrap().is_exp_convex(10f64.ln()));
    }

    #[test]
    fn wks_bound_constants() {
        let spec = gauss();
        let c = spec.sampling(1.0, 1.0, 40).unwrap();
        let cert = uniform_tail_wks(&spec, &c, 0.5, 1.0).unwrap();
        let z = c.z_star();
        let (a1, a0) = cn_line(&c, z);
        assert_relative_eq!(cert.c_n, (a1 + a0).powi(2) / 40.0, max_relative = 1e-14);
        assert_relative_eq!(cert.b_n, b_n_parts(&c, 1.0, 1.0, 1.0, z).2, max_relative = 1e-14);
        assert_eq!(cert.bound.unwrap(), 2.0 * cert.bound_unscaled.unwrap());
        assert_relative_eq!(cert.eps0_direct, (a1 + a0) / 40.0, max_relative = 1e-14);
    }

    #[test]
    fn wks_bound_is_the_power_factor_with_kappa_one() {
        let spec = gauss();
        let c = spec.sampling(1.0, 1.0, 30).unwrap();
        let (theta, eps) = (0.4, 2.0);
        let cert = uniform_tail_wks(&spec, &c, theta, eps).unwrap();
        let modulus_c = spec.c_x * cert.b_n.sqrt() / 30.0;
        let factor = power_entropy_factor_limit(modulus_c, 1.0, 1.0, theta * cert.c_n);
        let expected = (-0.5 * (eps * (1.0 - theta) / cert.c_n).powi(2)).exp() * factor;
        assert_relative_eq!(cert.bound_unscaled.unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn closed_form_strategy_matches_gaussian_closed_form() {
        let spec = gauss();
        for n in [20u64, 60, 200, 400] {
            let c = spec.sampling(1.0, 1.0, n).unwrap();
            for &(eps, delta) in &[(0.5, 0.1), (0.2, 0.05), (1.0, 0.5)] {
                let cert = certify_uniform(&spec, &c, eps, delta, ThetaStrategy::ClosedForm).unwrap();
                let cn = cert.c_n;
                if eps <= cn {
                    assert!(cert.theta.is_none() && !cert.certified);
                    continue;
                }
                let nf = n as f64;
                let closed = 2.0
                    * (-0.5 * (eps / cn - 1.0).powi(2)).exp()
                    * (eps * E * cert.b_n.sqrt() / (2.0 * nf * cn * cn) + 1.0);
                assert_relative_eq!(cert.bound.unwrap(), closed, max_relative = 1e-12);
                assert_eq!(cert.certified, closed < delta);
            }
        }
    }

    #[test]
    fn optimize_never_worse_than_closed_form() {
        let spec = ProcessSpec::new(1.0, 0.75, 1.2, OrliczFunction::power(1.5).unwrap()).unwrap();
        for n in [10u64, 50, 300, 2000] {
            let c = spec.sampling(1.0, 1.0, n).unwrap();
            for eps in [0.1, 0.5, 2.0, 10.0] {
                let closed = certify_uniform(&spec, &c, eps, 0.1, ThetaStrategy::ClosedForm).unwrap();
                let opt = certify_uniform(&spec, &c, eps, 0.1, ThetaStrategy::Optimize).unwrap();
                if let Some(p) = closed.bound {
                    assert!(opt.bound.unwrap() <= p * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn gate_failure_is_an_error() {
        let spec = gauss();
        let c = spec.sampling(10.0, 1.0, 3).unwrap();
        assert!(matches!(uniform_tail_wks(&spec, &c, 0.5, 1.0), Err(Error::Gate { .. })));
    }

    #[test]
    fn cn_decays_like_one_over_n() {
        let spec = gauss();
        let scaled: Vec<f64> = [256u64, 512, 1024]
            .iter()
            .map(|&n| uniform_tail_wks(&spec, &spec.sampling(1.0, 1.0, n).unwrap(), 0.5, 1.0).unwrap().c_n * n as f64)
            .collect();
        assert!((scaled[2] / scaled[1] - 1.0).abs() < 0.01);
    }

    #[test]
    fn min_terms_uniform_minimal_and_ordered() {
        let spec = gauss();
        for strategy in [ThetaStrategy::ClosedForm, ThetaStrategy::Optimize, ThetaStrategy::Fixed(0.5)] {
            let m = min_terms_uniform(&spec, 1.0, 1.0, 0.5, 0.1, strategy, 1_000_000).unwrap();
            assert!(m.certificate.certified && m.z < 1.0);
            let below = certify_uniform(&spec, &spec.sampling(1.0, 1.0, m.n - 1).unwrap(), 0.5, 0.1, strategy).unwrap();
            assert!(!below.certified, "{strategy}: n = {}", m.n);
        }
        let loose = min_terms_uniform(&spec, 1.0, 1.0, 0.5, 0.5, ThetaStrategy::Optimize, 1_000_000).unwrap();
        let tight = min_terms_uniform(&spec, 1.0, 1.0, 0.5, 0.01, ThetaStrategy::Optimize, 1_000_000).unwrap();
        assert!(tight.n >= loose.n);
        let half = min_terms_uniform(&spec, 1.0, 1.0, 0.25, 0.5, ThetaStrategy::Optimize, 1_000_000).unwrap();
        assert!(half.n >= loose.n);
    }

    #[test]
    fn strategy_grammar() {
        assert_eq!("closed-form".parse::<ThetaStrategy>().unwrap(), ThetaStrategy::ClosedForm);
        assert_eq!("optimize".parse::<ThetaStrategy>().unwrap(), ThetaStrategy::Optimize);
        assert_eq!("fixed:0.25".parse::<ThetaStrategy>().unwrap(), ThetaStrategy::Fixed(0.25));
        assert_eq!("0.5".parse::<ThetaStrategy>().unwrap(), ThetaStrategy::Fixed(0.5));
        assert!("1.5".parse::<ThetaStrategy>().is_err());
        assert!("best".parse::<ThetaStrategy>().is_err());
        for s in [ThetaStrategy::ClosedForm, ThetaStrategy::Optimize, ThetaStrategy::Fixed(0.3)] {
            assert_eq!(s.to_string().parse::<ThetaStrategy>().unwrap(), s);
        }
    }
}
