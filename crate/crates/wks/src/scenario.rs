//! Builds core objects from resolved settings.

use std::path::PathBuf;

use wks_core::orlicz::Family;
use wks_core::spectral_sim::{CoefficientLaw, PathModel, TrigBasis};
use wks_core::{OrliczFunction, ProcessSpec, SamplingConfig, SpectralMeasure};

use crate::config::Settings;
use crate::error::{usage, Result};
use crate::io::read_spectrum;

/// Atom pairs of the flat spectrum used when no `--spectrum` is given.
pub const DEFAULT_PAIRS: usize = 8;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub spec: ProcessSpec,
    pub omega: f64,
    pub horizon: f64,
    /// Spectral measure from `--spectrum`, if any.
    pub measure: Option<SpectralMeasure>,
}

impl Scenario {
    /// Reads the process and sampling-rate keys. With `defaults` the
    /// standard scenario (ω = 1, Λ = 0.75) fills in missing values.
    pub fn resolve(settings: &Settings, defaults: bool) -> Result<Self> {
        let omega =
            if defaults { settings.get_or("sampling.omega", 1.0)? } else { settings.require("sampling.omega")? };
        let lambda =
            if defaults { settings.get_or("process.lambda", 0.75)? } else { settings.require("process.lambda")? };
        let horizon = settings.get_or("sampling.T", 1.0)?;
        let measure = match settings.get::<PathBuf>("process.spectrum")? {
            Some(path) => Some(SpectralMeasure::new(read_spectrum(&path)?, lambda)?),
            None => None,
        };
        let b0 = match (&measure, settings.get::<f64>("process.B0")?) {
            (Some(m), None) => {
                settings.note("process.B0", m.total_mass());
                m.total_mass()
            }
            (Some(m), Some(b0)) if (m.total_mass() - b0).abs() > 1e-9 * b0.abs().max(1.0) => {
                return Err(usage!("--B0 {b0} disagrees with the spectrum's total mass {}", m.total_mass()));
            }
            (_, Some(b0)) => b0,
            (None, None) => settings.get_or("process.B0", 1.0)?,
        };
        let family: String = settings.get_or("process.family", "gaussian".to_string())?;
        let phi: OrliczFunction = family.parse()?;
        let c_x = settings.get_or("process.cx", 1.0)?;
        let spec = ProcessSpec::new(b0, lambda, c_x, phi)?;
        Ok(Self { spec, omega, horizon, measure })
    }

    pub fn config(&self, n: u64, z: Option<f64>) -> Result<SamplingConfig> {
        let c = self.spec.sampling(self.omega, self.horizon, n)?;
        Ok(match z {
            Some(z) => c.with_z(z)?,
            None => c,
        })
    }

    /// Sampling configuration from `--n` and `--z`.
    pub fn config_from(&self, settings: &Settings) -> Result<SamplingConfig> {
        self.config(settings.require("sampling.n")?, settings.get("sampling.z")?)
    }

    /// Spectral measure of the process: the `--spectrum` file, or a flat
    /// spectrum of total mass `B(0)`.
    pub fn spectral_measure(&self) -> Result<SpectralMeasure> {
        match &self.measure {
            Some(m) => Ok(m.clone()),
            None => Ok(SpectralMeasure::flat(self.spec.band_edge, DEFAULT_PAIRS, self.spec.b0)?),
        }
    }

    /// Path model for simulation: standard normal coefficients for the
    /// Gaussian family, two-sided Weibull ones for the Weibull family, with
    /// amplitudes scaled so the covariance matches the spectral measure.
    pub fn path_model(&self) -> Result<PathModel> {
        let measure = self.spectral_measure()?;
        match self.spec.phi.family() {
            Family::Gaussian => Ok(PathModel::gaussian(&measure)?),
            Family::WeibullPiecewise { alpha } => {
                let scale = 1.0 / CoefficientLaw::two_sided_weibull(alpha)?.second_moment();
                let basis = TrigBasis::from_measure(&measure)?;
                let scaled = basis.terms().iter().map(|&(l, a)| (l, a * scale.sqrt())).collect();
                Ok(PathModel::ssub_weibull(TrigBasis::new(scaled)?, alpha)?)
            }
            _ => Err(usage!("simulation supports the gaussian and weibull families, got {}", self.spec.phi)),
        }
    }
}
