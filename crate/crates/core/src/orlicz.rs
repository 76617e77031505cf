//! Orlicz N-functions and the convex-analysis operations the tail bounds
//! need: the density `f` with `φ(u) = ∫₀^|u| f`, the Young–Fenchel
//! conjugate `φ*`, the inverse `φ^(−1)` on `[0, ∞)`, and Condition Q.
//!
//! Built-in families carry closed forms. [`OrliczFunction::custom`] wraps an
//! arbitrary even convex evaluator and falls back to numeric search.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::domain;
use crate::numeric::{bisect, golden_section_max, last_three_agree};
use crate::{Error, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Which closed-form family an [`OrliczFunction`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `φ(x) = |x|^α / α`, `1 < α ≤ 2`.
    Power {
        alpha: f64,
    },
    /// `φ(x) = x² / 2`.
    Gaussian,
    /// `x²/α` on `|x| ≤ 1` and `|x|^α/α` beyond, `α ≥ 2`. The natural
    /// function for two-sided Weibull variables.
    WeibullPiecewise {
        alpha: f64,
    },
    Custom,
}

#[derive(Clone)]
struct CustomParts {
    name: String,
    phi: RealFn,
    density: Option<RealFn>,
}

/// An even convex N-function `φ` together with its density, conjugate and
/// inverse. Immutable once built; cheap to clone.
#[derive(Clone)]
pub struct OrliczFunction {
    family: Family,
    custom: Option<CustomParts>,
}

impl fmt::Debug for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.custom {
            Some(c) => write!(f, "OrliczFunction(custom {:?})", c.name),
            None => write!(f, "OrliczFunction({self})"),
        }
    }
}

impl OrliczFunction {
    /// `φ(x) = |x|^α / α` with conjugate `|x|^γ / γ`, `1/α + 1/γ = 1`.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(domain!("power family needs 1 < alpha <= 2, got {alpha}"));
        }
        Ok(Self { family: Family::Power { alpha }, custom: None })
    }

    pub fn gaussian() -> Self {
        Self { family: Family::Gaussian, custom: None }
    }

    pub fn weibull_piecewise(alpha: f64) -> Result<Self> {
        if !(alpha >= 2.0) || !alpha.is_finite() {
            return Err(domain!("Weibull-piecewise family needs alpha >= 2, got {alpha}"));
        }
        Ok(Self { family: Family::WeibullPiecewise { alpha }, custom: None })
    }

    /// Wraps a user-supplied N-function. `phi` is evaluated at `|x|`.
    /// Without a density, the right derivative is estimated numerically.
    pub fn custom<F>(name: &str, phi: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            family: Family::Custom,
            custom: Some(CustomParts { name: name.to_string(), phi: Arc::new(phi), density: None }),
        }
    }

    /// Like [`custom`](Self::custom) with an exact density.
    pub fn custom_with_density<F, D>(name: &str, phi: F, density: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            family: Family::Custom,
            custom: Some(CustomParts { name: name.to_string(), phi: Arc::new(phi), density: Some(Arc::new(density)) }),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.family, Family::Gaussian)
    }

    /// Hölder conjugate exponent `γ = α/(α−1)` for the power-type families.
    pub fn conjugate_exponent(&self) -> Option<f64> {
        match self.family {
            Family::Gaussian => Some(2.0),
            Family::Power { alpha } | Family::WeibullPiecewise { alpha } => Some(alpha / (alpha - 1.0)),
            Family::Custom => None,
        }
    }

    /// `φ(x)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let ax = x.abs();
        match self.family {
            Family::Gaussian => 0.5 * ax * ax,
            Family::Power { alpha } => ax.powf(alpha) / alpha,
            Family::WeibullPiecewise { alpha } => {
                if ax <= 1.0 {
                    ax * ax / alpha
                } else {
                    ax.powf(alpha) / alpha
                }
            }
            Family::Custom => (self.parts().phi)(ax),
        }
    }

    /// Right-continuous non-decreasing density `f(v)`, `v ≥ 0`.
    pub fn density(&self, v: f64) -> f64 {
        let v = v.abs();
        match self.family {
            Family::Gaussian => v,
            Family::Power { alpha } => v.powf(alpha - 1.0),
            Family::WeibullPiecewise { alpha } => {
                if v < 1.0 {
                    2.0 * v / alpha
                } else {
                    v.powf(alpha - 1.0)
                }
            }
            Family::Custom => {
                let parts = self.parts();
                match &parts.density {
                    Some(d) => d(v),
                    None => {
                        let h = 1e-6 * v.max(1e-3);
                        ((parts.phi)(v + h) - (parts.phi)(v)) / h
                    }
                }
            }
        }
    }

    /// Young–Fenchel conjugate `φ*(x) = sup_y (x·y − φ(y))`.
    ///
    /// Closed form for the built-in families, numeric search for custom ones.
    pub fn conjugate(&self, x: f64) -> Result<f64> {
        let ax = x.abs();
        match self.family {
            Family::Gaussian => Ok(0.5 * ax * ax),
            Family::Power { alpha } => {
                let gamma = alpha / (alpha - 1.0);
                Ok(ax.powf(gamma) / gamma)
            }
            Family::WeibullPiecewise { alpha } => {
                let gamma = alpha / (alpha - 1.0);
                Ok(if ax <= 2.0 / alpha {
                    alpha * ax * ax / 4.0
                } else if ax <= 1.0 {
                    ax - 1.0 / alpha
                } else {
                    ax.powf(gamma) / gamma
                })
            }
            Family::Custom => self.conjugate_numeric(x),
        }
    }

    /// `φ*(x)` by direct maximization, regardless of family.
    pub fn conjugate_numeric(&self, x: f64) -> Result<f64> {
        legendre_transform(|y| self.evaluate(y), x)
    }

    /// `φ^(−1)(y)` on `y ≥ 0`: the unique `x ≥ 0` with `φ(x) = y`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if y < 0.0 || y.is_nan() {
            return Err(domain!("inverse needs y >= 0, got {y}"));
        }
        match self.family {
            Family::Gaussian => Ok((2.0 * y).sqrt()),
            Family::Power { alpha } => Ok((alpha * y).powf(1.0 / alpha)),
            Family::WeibullPiecewise { alpha } => {
                Ok(if y <= 1.0 / alpha { (alpha * y).sqrt() } else { (alpha * y).powf(1.0 / alpha) })
            }
            Family::Custom => {
                if y == 0.0 {
                    return Ok(0.0);
                }
                let mut hi = 1.0;
                let mut doublings = 0;
                while self.evaluate(hi) < y {
                    hi *= 2.0;
                    doublings += 1;
                    if doublings > 1100 {
                        return Err(Error::Numeric(format!("cannot bracket inverse at y = {y}")));
                    }
                }
                bisect(|x| self.evaluate(x) - y, 0.0, hi, 200)
            }
        }
    }

    /// Estimates `lim_{x→0} φ(x)/x²` on the grid `x_k = 2^{−k}`, `k = 1..40`.
    pub fn check_condition_q(&self) -> ConditionQReport {
        let mut ratios = Vec::with_capacity(40);
        for k in 1..=40 {
            let x = 0.5f64.powi(k);
            let v = self.evaluate(x);
            // An N-function is strictly positive off zero; a zero here is
            // underflow or cancellation in the evaluator, so stop.
            if !(v > 0.0) || !v.is_finite() {
                break;
            }
            ratios.push(v / (x * x));
        }
        ConditionQReport::classify(ratios)
    }

    /// Whether `x ↦ φ(√x)` is convex, checked by midpoint convexity on a
    /// geometric grid over `[1e−4, 1e4]`.
    pub fn sqrt_composition_is_convex(&self) -> bool {
        let psi = |x: f64| self.evaluate(x.sqrt());
        let pts: Vec<f64> = (0..=160).map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / 160.0)).collect();
        pts.windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            let mid = psi(0.5 * (a + b));
            let chord = 0.5 * (psi(a) + psi(b));
            mid <= chord * (1.0 + 1e-12) + 1e-300
        }) && pts.windows(3).all(|w| {
            let (a, b) = (w[0], w[2]);
            psi(0.5 * (a + b)) <= 0.5 * (psi(a) + psi(b)) * (1.0 + 1e-12) + 1e-300
        })
    }

    fn parts(&self) -> &CustomParts {
        self.custom.as_ref().expect("custom family without evaluator")
    }
}

/// Numeric Young–Fenchel transform `sup_y (x·y − g(y))` of an even
/// superlinear `g`.
///
/// The search bracket `[0, Y]` doubles `Y` until `x·Y − g(Y)` starts to
/// decrease; superlinearity guarantees this happens and that the maximizer
/// lies inside the final bracket.
pub fn legendre_transform<G>(g: G, x: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let ax = x.abs();
    if ax == 0.0 {
        return Ok(0.0);
    }
    let objective = |y: f64| ax * y - g(y);
    let mut y = 1.0;
    let mut doublings = 0;
    while objective(2.0 * y) >= objective(y) {
        y *= 2.0;
        doublings += 1;
        if doublings > 1000 || !y.is_finite() {
            return Err(Error::Numeric(format!(
                "conjugate supremum at x = {x} not bracketed; the function is not superlinear"
            )));
        }
    }
    let hi = 2.0 * y;
    let (_, best) = golden_section_max(objective, 0.0, hi, 1e-13 * hi, 400);
    if !best.is_finite() {
        return Err(Error::Numeric(format!("conjugate at x = {x} is not finite")));
    }
    Ok(best.max(0.0))
}

impl fmt::Display for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Gaussian => write!(f, "gaussian"),
            Family::Power { alpha } => write!(f, "power:alpha={alpha}"),
            Family::WeibullPiecewise { alpha } => write!(f, "weibull:alpha={alpha}"),
            Family::Custom => write!(f, "custom:{}", self.parts().name),
        }
    }
}

/// Parses `gaussian`, `power:alpha=<a>` or `weibull:alpha=<a>`.
impl FromStr for OrliczFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h.trim(), Some(r.trim())),
            None => (s, None),
        };
        let alpha = || -> Result<f64> {
            let rest = rest.ok_or_else(|| Error::Input(format!("family `{head}` needs alpha=<value>")))?;
            let (key, value) =
                rest.split_once('=').ok_or_else(|| Error::Input(format!("expected alpha=<value>, got `{rest}`")))?;
            if key.trim() != "alpha" {
                return Err(Error::Input(format!("unknown family parameter `{}`", key.trim())));
            }
            value.trim().parse::<f64>().map_err(|_| Error::Input(format!("alpha is not a number: `{}`", value.trim())))
        };
        match head {
            "gaussian" if rest.is_none() => Ok(Self::gaussian()),
            "power" => Self::power(alpha()?),
            "weibull" => Self::weibull_piecewise(alpha()?),
            _ => Err(Error::Input(format!("unknown Orlicz family `{s}`"))),
        }
    }
}

/// An extended non-negative real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinity,
}

/// Result of [`OrliczFunction::check_condition_q`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionQReport {
    /// Estimated `lim φ(x)/x²`; `None` when the grid was inconclusive.
    pub limit_estimate: Option<ExtendedReal>,
    pub satisfied: bool,
    /// Ratios oscillate or drift too slowly to classify.
    pub inconclusive: bool,
    pub ratios: Vec<f64>,
}

impl ConditionQReport {
    fn classify(ratios: Vec<f64>) -> Self {
        let verdict = |limit: Option<ExtendedReal>, ratios: Vec<f64>| {
            let satisfied = match limit {
                Some(ExtendedReal::Infinity) => true,
                Some(ExtendedReal::Finite(c)) => c > 0.0,
                None => false,
            };
            Self { limit_estimate: limit, satisfied, inconclusive: limit.is_none(), ratios }
        };
        if last_three_agree(&ratios, 0.01) {
            let c = *ratios.last().unwrap();
            return verdict(Some(ExtendedReal::Finite(c)), ratios);
        }
        let tail_len = ratios.len().min(8);
        if tail_len < 4 {
            return verdict(None, ratios);
        }
        let tail = &ratios[ratios.len() - tail_len..];
        let growing = tail.windows(2).all(|w| w[1] > w[0]);
        let shrinking = tail.windows(2).all(|w| w[1] < w[0] * 0.99);
        if growing && tail[tail_len - 1] >= 1.05 * tail[0] {
            verdict(Some(ExtendedReal::Infinity), ratios)
        } else if shrinking {
            verdict(Some(ExtendedReal::Finite(0.0)), ratios)
        } else {
            verdict(None, ratios)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_values() {
        let g = OrliczFunction::power(2.0).unwrap();
        assert_eq!(g.evaluate(1.0), 0.5);
        assert_eq!(g.conjugate(1.0).unwrap(), 0.5);
        assert_eq!(g.density(1.0), 1.0);
        assert_eq!(OrliczFunction::gaussian().conjugate(0.0).unwrap(), 0.0);
    }

    #[test]
    fn power_conjugate_closed_form() {
        let p = OrliczFunction::power(1.5).unwrap();
        assert_relative_eq!(p.conjugate_exponent().unwrap(), 3.0);
        assert_relative_eq!(p.conjugate(2.0).unwrap(), 8.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(p.conjugate(1.0).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(p.conjugate_numeric(2.0).unwrap(), 8.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn power_domain_errors() {
        assert!(matches!(OrliczFunction::power(1.0), Err(Error::Domain(_))));
        assert!(matches!(OrliczFunction::power(2.5), Err(Error::Domain(_))));
        assert!(matches!(OrliczFunction::weibull_piecewise(1.9), Err(Error::Domain(_))));
    }

    #[test]
    fn weibull_branches() {
        let w2 = OrliczFunction::weibull_piecewise(2.0).unwrap();
        for x in [0.3, 1.0, 2.5] {
            assert_relative_eq!(w2.evaluate(x), x * x / 2.0, epsilon = 1e-15);
        }
        assert_relative_eq!(w2.conjugate(1.0).unwrap(), 0.5);
        let w4 = OrliczFunction::weibull_piecewise(4.0).unwrap();
        let gamma = 4.0 / 3.0;
        assert_relative_eq!(w4.conjugate(3.0).unwrap(), 3f64.powf(gamma) / gamma, epsilon = 1e-12);
        assert_relative_eq!(w4.conjugate(0.4).unwrap(), 0.16, epsilon = 1e-15);
        // middle branch
        assert_relative_eq!(w4.conjugate(0.8).unwrap(), 0.8 - 0.25, epsilon = 1e-15);
    }

    #[test]
    fn weibull_conjugate_is_continuous_at_branch_points() {
        for alpha in [2.0, 3.0, 4.0, 7.5] {
            let w = OrliczFunction::weibull_piecewise(alpha).unwrap();
            for b in [2.0 / alpha, 1.0] {
                let l = w.conjugate(b - 1e-10).unwrap();
                let r = w.conjugate(b + 1e-10).unwrap();
                assert!((l - r).abs() < 1e-8, "alpha {alpha} at {b}: {l} vs {r}");
            }
            assert!((w.evaluate(1.0 - 1e-12) - w.evaluate(1.0 + 1e-12)).abs() < 1e-10);
        }
    }

    #[test]
    fn inverse_round_trips() {
        let fams = [
            OrliczFunction::gaussian(),
            OrliczFunction::power(1.3).unwrap(),
            OrliczFunction::weibull_piecewise(3.0).unwrap(),
            OrliczFunction::custom("cosh", |x: f64| 2.0 * (0.5 * x).sinh().powi(2)),
        ];
        for phi in &fams {
            for y in [1e-6, 0.1, 1.0 / 3.0, 2.0, 50.0] {
                let x = phi.inverse(y).unwrap();
                assert_relative_eq!(phi.evaluate(x), y, max_relative = 1e-9);
            }
        }
        assert!(OrliczFunction::gaussian().inverse(-1.0).is_err());
    }

    #[test]
    fn condition_q_classification() {
        let g = OrliczFunction::gaussian().check_condition_q();
        assert_eq!(g.limit_estimate, Some(ExtendedReal::Finite(0.5)));
        assert!(g.satisfied);

        let p = OrliczFunction::power(1.5).unwrap().check_condition_q();
        assert_eq!(p.limit_estimate, Some(ExtendedReal::Infinity));
        assert!(p.satisfied);

        let cubic = OrliczFunction::custom("cubic", |x: f64| x.powi(3) / 3.0).check_condition_q();
        assert_eq!(cubic.limit_estimate, Some(ExtendedReal::Finite(0.0)));
        assert!(!cubic.satisfied && !cubic.inconclusive);

        let w = OrliczFunction::weibull_piecewise(4.0).unwrap().check_condition_q();
        assert_eq!(w.limit_estimate, Some(ExtendedReal::Finite(0.25)));
    }

    #[test]
    fn condition_q_oscillation_is_inconclusive() {
        // ratio alternates between 1 and 2 on the dyadic grid
        let wobble = OrliczFunction::custom("wobble", |x: f64| {
            let k = (-x.log2()).round() as i64;
            if k % 2 == 0 {
                x * x
            } else {
                2.0 * x * x
            }
        });
        let r = wobble.check_condition_q();
        assert!(r.inconclusive);
        assert!(!r.satisfied);
        assert_eq!(r.limit_estimate, None);
    }

    #[test]
    fn custom_underflow_does_not_fake_zero_limit() {
        // cosh(x) - 1 evaluated naively cancels to 0 for tiny x
        let naive = OrliczFunction::custom("cosh-naive", |x: f64| x.cosh() - 1.0);
        let r = naive.check_condition_q();
        assert_ne!(r.limit_estimate, Some(ExtendedReal::Finite(0.0)));
    }

    #[test]
    fn grammar_round_trip() {
        for s in ["gaussian", "power:alpha=1.5", "weibull:alpha=4"] {
            let phi: OrliczFunction = s.parse().unwrap();
            assert_eq!(phi.to_string(), s);
        }
        assert!("power".parse::<OrliczFunction>().is_err());
        assert!("power:beta=1.5".parse::<OrliczFunction>().is_err());
        assert!("weibull:alpha=1".parse::<OrliczFunction>().is_err());
        assert!("laplace".parse::<OrliczFunction>().is_err());
    }

    #[test]
    fn sqrt_convexity() {
        assert!(OrliczFunction::weibull_piecewise(2.0).unwrap().sqrt_composition_is_convex());
        assert!(OrliczFunction::weibull_piecewise(5.0).unwrap().sqrt_composition_is_convex());
        assert!(OrliczFunction::gaussian().sqrt_composition_is_convex());
        // |x|^1.5/1.5 composed with sqrt is x^0.75, concave
        assert!(!OrliczFunction::power(1.5).unwrap().sqrt_composition_is_convex());
    }
}
