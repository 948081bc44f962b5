//! Spontaneous-emission spectral model and the α ↔ λ map.
//!
//! The expected count density in the detector is `α / E` with
//! `α = c · λ · D(m, r_C)`, where `c` is the exposure factor in
//! electron·seconds and `D` the rate coefficient from [`crate::units`].

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::spectrum::EnergyBin;
use crate::units::{CouplingMode, PhysicalConstants};

/// A point in collapse-model parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CslParams {
    /// Collapse rate in s⁻¹.
    pub lambda: f64,
    /// Correlation length in metres.
    pub r_c: f64,
    pub coupling: CouplingMode,
}

impl CslParams {
    pub fn new(lambda: f64, r_c: f64, coupling: CouplingMode) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::domain(format!("lambda must be >= 0, got {lambda}")));
        }
        require_positive("r_c", r_c)?;
        Ok(CslParams { lambda, r_c, coupling })
    }

    /// GRW reference point, mass-proportional.
    pub fn grw() -> Self {
        CslParams { lambda: 1e-16, r_c: 1e-7, coupling: CouplingMode::MassProportional }
    }
}

/// Amplitude of the `α / E` spectrum, in counts·keV for 1 keV bins.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlphaCoefficient(f64);

impl AlphaCoefficient {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(AlphaCoefficient(value))
        } else {
            Err(Error::domain(format!("alpha must be >= 0, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Emitted photons per electron, per second, per keV at energy `e` (keV).
pub fn emission_rate_density(
    constants: &PhysicalConstants,
    e: f64,
    params: &CslParams,
) -> Result<f64> {
    require_positive("energy", e)?;
    let d = constants.coupling(params.coupling, params.r_c)?;
    Ok(params.lambda * d / e)
}

/// Counts·keV per unit λ (s⁻¹) at the given correlation length.
pub fn alpha_per_lambda(
    constants: &PhysicalConstants,
    r_c: f64,
    coupling: CouplingMode,
    c_exp: f64,
) -> Result<f64> {
    require_positive("c_exp", c_exp)?;
    Ok(c_exp * constants.coupling(coupling, r_c)?)
}

pub fn alpha_from_lambda(
    constants: &PhysicalConstants,
    params: &CslParams,
    c_exp: f64,
) -> Result<AlphaCoefficient> {
    let per_lambda = alpha_per_lambda(constants, params.r_c, params.coupling, c_exp)?;
    AlphaCoefficient::new(params.lambda * per_lambda)
}

/// Inverse of [`alpha_from_lambda`].
pub fn lambda_from_alpha(
    constants: &PhysicalConstants,
    alpha: AlphaCoefficient,
    r_c: f64,
    coupling: CouplingMode,
    c_exp: f64,
) -> Result<f64> {
    let per_lambda = alpha_per_lambda(constants, r_c, coupling, c_exp)?;
    Ok(alpha.value() / per_lambda)
}

/// Expected counts per bin, `α · (width / 1 keV) / E_i`.
pub fn expected_counts_for_alpha(alpha: AlphaCoefficient, bins: &[EnergyBin]) -> Vec<f64> {
    bins.iter().map(|b| alpha.value() * b.width / b.center).collect()
}

pub fn expected_counts(
    constants: &PhysicalConstants,
    params: &CslParams,
    c_exp: f64,
    bins: &[EnergyBin],
) -> Result<Vec<f64>> {
    let alpha = alpha_from_lambda(constants, params, c_exp)?;
    Ok(expected_counts_for_alpha(alpha, bins))
}
