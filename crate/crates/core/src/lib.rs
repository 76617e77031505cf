//! Truncation-error analysis for Whittaker–Kotel'nikov–Shannon (WKS) sampling
//! expansions of bandlimited φ-sub-Gaussian processes.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only computation:
//!
//! * [`orlicz`]: N-functions, their densities, Young–Fenchel conjugates and
//!   inverses.
//! * [`sampling`]: cardinal weights, truncated sampling sums, the residual
//!   kernel and the sine-sum inequalities behind the bounds.
//! * [`ms_bounds`]: mean-square truncation bounds and an exact oracle for
//!   discrete spectral measures.
//! * [`lp_approx`]: tail bounds and certification for `∫|X − X_n|^p` over
//!   `[0, T]`, and a minimal-order solver.
//! * [`uniform_approx`]: entropy-integral tail bounds for the sup-norm error
//!   and uniform certification.
//! * [`spectral_sim`]: seeded path simulation and Monte Carlo exceedance
//!   estimates used to check every certificate.
//!
//! File formats, the CLI and parallel trial execution live in the `wks`
//! companion crate.
#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod lp_approx;
pub mod ms_bounds;
pub mod numeric;
pub mod orlicz;
pub mod sampling;
pub mod spectral_sim;
pub mod uniform_approx;

pub use error::{Error, Result};
pub use lp_approx::{LpCertificate, MinTerms, ProcessSpec};
pub use ms_bounds::{MsBoundReport, SpectralMeasure};
pub use orlicz::{ConditionQReport, OrliczFunction};
pub use sampling::{LatticeSamples, SamplingConfig};
pub use spectral_sim::{PathSample, TailEstimate};
pub use uniform_approx::{EntropyModel, ThetaStrategy, UniformCertificate};
