//! Low-count Poisson analysis with a uniform prior on λ.
//!
//! The total count `y` is Poisson with mean `Λ(λ) = k·λ + 1`, where
//! `k = conversion · harmonic_sum`. Under a flat prior the posterior in Λ
//! is the gamma density `Λ^y e^−Λ / y!` restricted to `Λ ≥ 1` (since λ ≥ 0)
//! and renormalized there. The credible upper limit `Λ*` solves
//!
//! ```text
//! [P(y+1, Λ*) − P(y+1, 1)] / [1 − P(y+1, 1)] = CL
//! ```
//!
//! which is evaluated in upper-tail form, `Q(y+1, Λ*) = (1 − CL)·Q(y+1, 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{require_open_unit, require_positive, Error, Result};
use crate::special::{gamma_density, gamma_quantile_upper, reg_inc_gamma_upper};
use crate::spectrum::EnergyBin;

/// The `+1` in `Λ(λ) = y_s + 1`.
pub const POSTERIOR_OFFSET: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSpec {
    pub y_total: u64,
    /// Σ_i (width_i / 1 keV) / E_i in keV⁻¹.
    pub harmonic_sum: f64,
    /// α per unit λ, `c_exp · D`, in counts·keV·s.
    pub conversion: f64,
    pub offset: f64,
}

impl PosteriorSpec {
    pub fn new(y_total: u64, harmonic_sum: f64, conversion: f64) -> Result<Self> {
        require_positive("harmonic_sum", harmonic_sum)?;
        require_positive("conversion", conversion)?;
        Ok(PosteriorSpec { y_total, harmonic_sum, conversion, offset: POSTERIOR_OFFSET })
    }

    /// Expected total counts per unit λ.
    pub fn slope(&self) -> f64 {
        self.conversion * self.harmonic_sum
    }

    fn shape(&self) -> f64 {
        self.y_total as f64 + 1.0
    }

    /// Normalized posterior density over λ (s), zero for λ < 0.
    pub fn density(&self, lambda: f64) -> Result<f64> {
        if lambda < 0.0 {
            return Ok(0.0);
        }
        let norm = reg_inc_gamma_upper(self.shape(), self.offset)?;
        let big_lambda = self.slope() * lambda + self.offset;
        Ok(self.slope() * gamma_density(self.shape(), big_lambda) / norm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredibleLimit {
    /// Upper limit on λ in s⁻¹.
    pub lambda_upper: f64,
    pub confidence: f64,
    /// Posterior quantile `Λ*` of the expected total counts.
    pub lambda_cap: f64,
}

/// Σ (width / 1 keV) / E over the bins.
pub fn harmonic_sum(bins: &[EnergyBin]) -> f64 {
    bins.iter().map(|b| b.width / b.center).sum()
}

/// The truncated-posterior quantile `Λ*` for observed total `y_total`.
pub fn expected_total_cap(y_total: u64, offset: f64, confidence: f64) -> Result<f64> {
    require_open_unit("confidence", confidence)?;
    if !(offset.is_finite() && offset >= 0.0) {
        return Err(Error::domain(format!("posterior offset must be >= 0, got {offset}")));
    }
    let shape = y_total as f64 + 1.0;
    let tail_at_offset = reg_inc_gamma_upper(shape, offset)?;
    let target = (1.0 - confidence) * tail_at_offset;
    if target <= 0.0 {
        return Err(Error::Numerical(format!(
            "posterior tail underflows at offset {offset} for y = {y_total}"
        )));
    }
    Ok(gamma_quantile_upper(shape, target)?.max(offset))
}

/// Credible upper limit on the spectrum amplitude α (counts·keV).
pub fn alpha_credible_limit(y_total: u64, harmonic_sum: f64, confidence: f64) -> Result<f64> {
    require_positive("harmonic_sum", harmonic_sum)?;
    let cap = expected_total_cap(y_total, POSTERIOR_OFFSET, confidence)?;
    Ok((cap - POSTERIOR_OFFSET) / harmonic_sum)
}

pub fn lambda_credible_limit(spec: &PosteriorSpec, confidence: f64) -> Result<CredibleLimit> {
    let slope = spec.slope();
    if !(slope.is_finite() && slope > 0.0) {
        return Err(Error::domain(format!("degenerate posterior slope {slope}")));
    }
    let cap = expected_total_cap(spec.y_total, spec.offset, confidence)?;
    Ok(CredibleLimit { lambda_upper: (cap - spec.offset) / slope, confidence, lambda_cap: cap })
}
