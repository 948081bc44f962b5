//! Weighted least-squares fit of `α / E` to a selected spectrum and the
//! one-sided Gaussian upper bound on α.
//!
//! With per-bin shape `g_i = width_i / E_i` and `σ_i² = y_i`, the χ² is
//! quadratic in α and the minimum is closed form:
//!
//! ```text
//! α̂ = Σ g_i / Σ (g_i² / y_i),    σ_α = (Σ g_i² / y_i)^(−1/2)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{require_open_unit, Error, Result};
use crate::spectrum::{BinnedSpectrum, EnergyBin};

pub use crate::special::normal_quantile;

/// Free parameters in the fit (α only; no background term).
pub const N_PARAMS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub alpha_hat: f64,
    pub sigma_alpha: f64,
    pub chi2: f64,
    pub n_bins: usize,
    pub n_params: usize,
    pub reduced_chi2: f64,
}

impl FitResult {
    pub fn ndf(&self) -> usize {
        self.n_bins - self.n_params
    }
}

fn shape(bin: &EnergyBin) -> f64 {
    bin.width / bin.center
}

/// χ² of the `α / E` model against the bins, with `σ_i² = y_i`.
pub fn chi2_at(bins: &[EnergyBin], alpha: f64) -> f64 {
    bins.iter()
        .map(|b| {
            let y = b.counts as f64;
            let r = y - alpha * shape(b);
            r * r / y
        })
        .sum()
}

/// Fits the amplitude α. The spectrum must already have gone through
/// [`crate::spectrum::select`] with a positive count threshold.
pub fn fit_alpha(spectrum: &BinnedSpectrum) -> Result<FitResult> {
    let bins = spectrum.bins();
    if bins.len() <= N_PARAMS {
        return Err(Error::InsufficientData(format!(
            "fit needs at least {} bins, got {}",
            N_PARAMS + 1,
            bins.len()
        )));
    }
    if let Some(b) = bins.iter().find(|b| b.counts == 0) {
        return Err(Error::Precondition(format!(
            "bin at {} keV has zero counts; apply a min-count selection before fitting",
            b.center
        )));
    }

    let (sum_g, sum_g2_over_y) = bins.iter().fold((0.0, 0.0), |(sg, sgg), b| {
        let g = shape(b);
        (sg + g, sgg + g * g / b.counts as f64)
    });
    let alpha_hat = sum_g / sum_g2_over_y;
    let sigma_alpha = sum_g2_over_y.powf(-0.5);
    let chi2 = chi2_at(bins, alpha_hat);
    let n_bins = bins.len();
    Ok(FitResult {
        alpha_hat,
        sigma_alpha,
        chi2,
        n_bins,
        n_params: N_PARAMS,
        reduced_chi2: chi2 / (n_bins - N_PARAMS) as f64,
    })
}

/// One-sided upper bound `α̂ + z(confidence) · σ_α`.
pub fn alpha_upper_limit(fit: &FitResult, confidence: f64) -> Result<f64> {
    upper_bound(fit.alpha_hat, fit.sigma_alpha, confidence)
}

pub fn upper_bound(alpha_hat: f64, sigma_alpha: f64, confidence: f64) -> Result<f64> {
    require_open_unit("confidence", confidence)?;
    Ok(alpha_hat + normal_quantile(confidence)? * sigma_alpha)
}
