//! Upper limits on the Continuous Spontaneous Localization collapse rate λ
//! from binned X-ray emission spectra.
//!
//! Two routes are provided: a weighted least-squares fit of the `α / E`
//! spectrum with a one-sided Gaussian bound ([`chi2`]), and a Poisson
//! analysis of the total count with a flat prior on λ ([`bayes`]). Limits
//! found at one correlation length are mapped across the λ–r_C plane by
//! [`scan`].

pub mod bayes;
pub mod chi2;
pub mod cli;
pub mod config;
pub mod error;
pub mod rate;
pub mod scan;
pub mod special;
pub mod spectrum;
pub mod svg;
pub mod synth;
pub mod units;

pub use error::{Error, ErrorClass, Result};
pub use rate::{AlphaCoefficient, CslParams};
pub use spectrum::{BinnedSpectrum, EnergyBin, RangeSelection};
pub use units::{CouplingMode, ExposureConfig, PhysicalConstants};
