//! Flat `key = value` run configuration for physical constants and exposure.
//!
//! ```text
//! # germanium, 80 kg·day
//! exposure_kg_day = 80
//! electrons_per_atom = 30
//! ```
//!
//! Recognised keys: `fine_structure_constant`, `hbar_c_mev_fm`,
//! `proton_mass_mev`, `electron_mass_mev`, `avogadro`, `atoms_per_kg`,
//! `exposure_kg_day`, `seconds_per_day`, `electrons_per_atom`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::units::{ExposureConfig, PhysicalConstants};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunConfig {
    pub constants: PhysicalConstants,
    pub exposure: ExposureConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected key = value, found '{line}'"),
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad value for {key}: {e}"),
            })?;
            cfg.set(key, value).map_err(|e| match e {
                Error::Validation(msg) => Error::Parse { line: line_no, message: msg },
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "fine_structure_constant" => &mut self.constants.fine_structure_constant,
            "hbar_c_mev_fm" => &mut self.constants.hbar_c,
            "proton_mass_mev" => &mut self.constants.proton_mass_energy,
            "electron_mass_mev" => &mut self.constants.electron_mass_energy,
            "avogadro" => &mut self.constants.avogadro,
            "atoms_per_kg" => &mut self.exposure.atoms_per_kg,
            "exposure_kg_day" => &mut self.exposure.exposure_kg_day,
            "seconds_per_day" => &mut self.exposure.seconds_per_day,
            "electrons_per_atom" => &mut self.exposure.electrons_per_atom,
            other => return Err(Error::Validation(format!("unknown config key '{other}'"))),
        };
        *slot = value;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.exposure.validate().map_err(|e| Error::Validation(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(RunConfig::parse("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn overrides_apply() {
        let cfg = RunConfig::parse("electrons_per_atom = 4\nexposure_kg_day=40.5\n").unwrap();
        assert_eq!(cfg.exposure.electrons_per_atom, 4.0);
        assert_eq!(cfg.exposure.exposure_kg_day, 40.5);
        assert_eq!(cfg.constants, PhysicalConstants::default());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(RunConfig::parse("colour = 3"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(RunConfig::parse("\natoms_per_kg = lots"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(RunConfig::parse("atoms_per_kg"), Err(Error::Parse { .. })));
    }

    #[test]
    fn overrides_are_validated() {
        assert!(matches!(RunConfig::parse("exposure_kg_day = -1"), Err(Error::Validation(_))));
        assert!(matches!(RunConfig::parse("fine_structure_constant = 0.0078"), Err(Error::Validation(_))));
        assert!(matches!(RunConfig::parse("electron_mass_mev = 0.6"), Err(Error::Validation(_))));
    }
}
