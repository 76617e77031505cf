use alloc::string::String;

/// Errors raised by the bound computations and simulators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter lies outside the domain where the formula is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// An admissibility condition of a bound does not hold. The bound is
    /// invalid here, so nothing is computed.
    #[error("admissibility gate violated: {inequality} ({detail})")]
    Gate { inequality: &'static str, detail: String },
    /// Malformed input data (missing samples, atoms outside the band, ...).
    #[error("invalid input: {0}")]
    Input(String),
    /// A numeric search or quadrature failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// An entropy integral does not converge.
    #[error("divergent integral: {0}")]
    Divergence(String),
    /// No truncation order up to `cap` satisfies the requested certificate.
    #[error("unsatisfiable: no truncation order n <= {cap} is certified")]
    Unsatisfiable { cap: u64 },
    /// The simulation grid is too coarse for the sampling rate.
    #[error("grid resolution: {0}")]
    Resolution(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::Error::Domain(alloc::format!($($arg)*)) };
}
macro_rules! input {
    ($($arg:tt)*) => { $crate::Error::Input(alloc::format!($($arg)*)) };
}
pub(crate) use {domain, input};
