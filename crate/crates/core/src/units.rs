//! Physical constants, coupling modes and the detector exposure factor.
//!
//! The spontaneous emission rate per quasi-free electron is
//!
//! ```text
//! dΓ/dE = λ · D / E,    D = α_fs · (ħc / (r_C · mc²))² / π
//! ```
//!
//! with λ in s⁻¹ and E in keV, so dΓ/dE comes out in s⁻¹·keV⁻¹. `D` is the
//! rate coefficient e²/(4π² r_C² m²) evaluated with e² = 4π·α_fs
//! (Heaviside-Lorentz units, ħ = c = 1) and ħ, c restored.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Femtometres per metre.
const FM_PER_M: f64 = 1.0e15;

/// Historical upper limits on λ at r_C = 1e-7 m, kept for reference only.
pub mod historical {
    /// Early single-energy Ge estimate, mass-proportional coupling.
    pub const EARLY_GE_MASS_PROP: f64 = 2.20e-10;
    /// Early single-energy Ge estimate, non-mass-proportional coupling.
    pub const EARLY_GE_NON_MASS_PROP: f64 = 0.55e-16;
    /// Reanalysis with improved low-background data, mass-proportional.
    pub const REANALYSIS_MASS_PROP: f64 = 8.0e-10;
    /// Reanalysis with improved low-background data, non-mass-proportional.
    pub const REANALYSIS_NON_MASS_PROP: f64 = 2.0e-16;
}

/// Constants entering the emission-rate coefficient (CODATA 2018 defaults).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub fine_structure_constant: f64,
    /// ħc in MeV·fm.
    pub hbar_c: f64,
    /// Nucleon mass-energy in MeV; the proton value stands in for m_N.
    pub proton_mass_energy: f64,
    pub electron_mass_energy: f64,
    pub avogadro: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            fine_structure_constant: 7.297_352_569_3e-3,
            hbar_c: 197.326_980_4,
            proton_mass_energy: 938.272_088_16,
            electron_mass_energy: 0.510_998_950_00,
            avogadro: 6.022_140_76e23,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let alpha = self.fine_structure_constant;
        if !(alpha > 7.297e-3 && alpha < 7.298e-3) {
            return Err(Error::Validation(format!(
                "fine_structure_constant {alpha} outside (7.297e-3, 7.298e-3)"
            )));
        }
        require_positive("hbar_c", self.hbar_c)?;
        require_positive("proton_mass_energy", self.proton_mass_energy)?;
        require_positive("electron_mass_energy", self.electron_mass_energy)?;
        require_positive("avogadro", self.avogadro)?;
        let ratio = self.proton_mass_energy / self.electron_mass_energy;
        if !(ratio > 1836.0 && ratio < 1836.3) {
            return Err(Error::Validation(format!(
                "proton/electron mass ratio {ratio} outside (1836.0, 1836.3)"
            )));
        }
        Ok(())
    }

    /// Mass-energy (MeV) of the particle the collapse noise couples to.
    pub fn mass_energy(&self, coupling: CouplingMode) -> f64 {
        match coupling {
            CouplingMode::MassProportional => self.proton_mass_energy,
            CouplingMode::NonMassProportional => self.electron_mass_energy,
        }
    }

    /// Rate coefficient `D` for a coupling mode at correlation length `r_c` (m).
    pub fn coupling(&self, coupling: CouplingMode, r_c: f64) -> Result<f64> {
        dimensionless_coupling_with(self, self.mass_energy(coupling), r_c)
    }
}

/// Which mass enters the emission rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CouplingMode {
    /// Noise coupled to mass density; nucleon mass.
    #[serde(rename = "mass-prop")]
    MassProportional,
    /// Electron mass.
    #[serde(rename = "non-mass-prop")]
    NonMassProportional,
}

impl CouplingMode {
    pub const ALL: [CouplingMode; 2] =
        [CouplingMode::MassProportional, CouplingMode::NonMassProportional];

    pub fn as_str(self) -> &'static str {
        match self {
            CouplingMode::MassProportional => "mass-prop",
            CouplingMode::NonMassProportional => "non-mass-prop",
        }
    }
}

impl fmt::Display for CouplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CouplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mass-prop" => Ok(CouplingMode::MassProportional),
            "non-mass-prop" => Ok(CouplingMode::NonMassProportional),
            other => Err(Error::Validation(format!(
                "unknown coupling '{other}' (expected mass-prop or non-mass-prop)"
            ))),
        }
    }
}

/// Factors whose product converts a per-electron rate into expected counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExposureConfig {
    pub atoms_per_kg: f64,
    pub exposure_kg_day: f64,
    pub seconds_per_day: f64,
    /// Quasi-free electrons per atom that contribute to the emission.
    pub electrons_per_atom: f64,
}

impl Default for ExposureConfig {
    /// Germanium, 80 kg·day, 30 outermost electrons.
    fn default() -> Self {
        ExposureConfig {
            atoms_per_kg: 8.29e24,
            exposure_kg_day: 80.0,
            seconds_per_day: 8.64e4,
            electrons_per_atom: 30.0,
        }
    }
}

impl ExposureConfig {
    pub fn validate(&self) -> Result<()> {
        require_positive("atoms_per_kg", self.atoms_per_kg)?;
        require_positive("exposure_kg_day", self.exposure_kg_day)?;
        require_positive("seconds_per_day", self.seconds_per_day)?;
        require_positive("electrons_per_atom", self.electrons_per_atom)?;
        Ok(())
    }
}

/// Exposure factor `c` in electron·seconds: the plain product of the four factors.
pub fn exposure_factor(config: &ExposureConfig) -> Result<f64> {
    config.validate()?;
    Ok(config.atoms_per_kg
        * config.exposure_kg_day
        * config.seconds_per_day
        * config.electrons_per_atom)
}

/// Rate coefficient `D` with the default constants.
///
/// `mass_energy` is in MeV and `r_c` in metres.
pub fn dimensionless_coupling(mass_energy: f64, r_c: f64) -> Result<f64> {
    dimensionless_coupling_with(&PhysicalConstants::default(), mass_energy, r_c)
}

pub fn dimensionless_coupling_with(
    constants: &PhysicalConstants,
    mass_energy: f64,
    r_c: f64,
) -> Result<f64> {
    require_positive("mass_energy", mass_energy)?;
    require_positive("r_c", r_c)?;
    let ratio = constants.hbar_c / (r_c * FM_PER_M * mass_energy);
    Ok(constants.fine_structure_constant * ratio * ratio / std::f64::consts::PI)
}
