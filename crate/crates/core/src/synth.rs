//! Synthetic `α / E` spectra and frequentist coverage of both limit engines.
//!
//! Random numbers come from ChaCha8 (`rand_chacha`), seeded with
//! `seed_from_u64`; uniforms are the 53-bit `Standard` f64 draw, which is
//! platform independent. `sample_spectrum` uses stream 0 and coverage trial
//! `i` uses stream `i + 1`, so trials are reproducible in isolation.
//!
//! Poisson variates use sequential inversion for means below 30 and
//! Hörmann's PTRS transformed rejection above.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bayes::{alpha_credible_limit, harmonic_sum};
use crate::chi2::{alpha_upper_limit, fit_alpha};
use crate::error::{require_open_unit, Error, Result};
use crate::scan::Method;
use crate::special::ln_gamma;
use crate::spectrum::{select, total_counts, BinnedSpectrum, RangeSelection};

/// Minimum per-bin count applied on the χ² route.
pub const CHI2_MIN_COUNTS: u64 = 5;

const INVERSION_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub alpha_true: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub bin_width: f64,
    /// Expected background counts added to every bin.
    pub flat_background_per_bin: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            alpha_true: 115.0,
            e_min: 14.5,
            e_max: 48.5,
            bin_width: 1.0,
            flat_background_per_bin: 0.0,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_true.is_finite() && self.alpha_true >= 0.0) {
            return Err(Error::Validation(format!("alpha_true must be >= 0, got {}", self.alpha_true)));
        }
        if !(self.flat_background_per_bin.is_finite() && self.flat_background_per_bin >= 0.0) {
            return Err(Error::Validation(format!(
                "background must be >= 0, got {}",
                self.flat_background_per_bin
            )));
        }
        self.binning().map(|_| ())
    }

    /// Empty spectrum with the configured binning.
    pub fn binning(&self) -> Result<BinnedSpectrum> {
        BinnedSpectrum::tiling(self.e_min, self.e_max, self.bin_width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Trials that produced a limit (the denominator).
    pub trials: usize,
    pub covered: usize,
    /// Trials dropped because the selection or fit had no usable data.
    pub skipped: usize,
    pub coverage_fraction: f64,
    pub method: Method,
    pub confidence: f64,
    pub seed: u64,
    pub alpha_true: f64,
}

/// One Poisson variate with the given mean.
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        0
    } else if mean < INVERSION_LIMIT {
        poisson_inversion(rng, mean)
    } else {
        poisson_ptrs(rng, mean)
    }
}

fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let u: f64 = rng.gen();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        if p <= 0.0 && cdf < u {
            // Float CDF saturated below u; the remaining mass is below 1 ulp.
            break;
        }
    }
    k
}

fn poisson_ptrs<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.gen::<f64>() - 0.5;
        let v: f64 = rng.gen();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mean + k * loglam - ln_gamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

fn sample_on<R: Rng + ?Sized>(config: &SynthConfig, grid: &BinnedSpectrum, rng: &mut R) -> Result<BinnedSpectrum> {
    // Signal for every bin first, then background, so that adding background
    // on a matched stream never lowers a bin.
    let mut counts: Vec<u64> = grid
        .bins()
        .iter()
        .map(|b| sample_poisson(rng, config.alpha_true * b.width / b.center))
        .collect();
    if config.flat_background_per_bin > 0.0 {
        for c in counts.iter_mut() {
            *c += sample_poisson(rng, config.flat_background_per_bin);
        }
    }
    grid.with_counts(&counts)
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

/// Draws one spectrum; deterministic for a fixed config.
pub fn sample_spectrum(config: &SynthConfig) -> Result<BinnedSpectrum> {
    config.validate()?;
    let grid = config.binning()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    Ok(sample_on(config, &grid, &mut rng)?.with_label(format!(
        "synthetic alpha={} seed={}",
        config.alpha_true, config.seed
    )))
}

/// Spectrum used by coverage trial `trial`.
pub fn trial_spectrum(config: &SynthConfig, trial: usize) -> Result<BinnedSpectrum> {
    config.validate()?;
    let grid = config.binning()?;
    sample_on(config, &grid, &mut trial_rng(config.seed, trial))
}

/// α upper limit for one spectrum, or `None` when the route has no usable data.
pub fn alpha_limit(
    spectrum: &BinnedSpectrum,
    config: &SynthConfig,
    method: Method,
    confidence: f64,
) -> Result<Option<f64>> {
    match method {
        Method::Chi2 => {
            let sel = RangeSelection::new(config.e_min, config.e_max, CHI2_MIN_COUNTS)?;
            let fit = select(spectrum, &sel).and_then(|s| fit_alpha(&s));
            match fit {
                Ok(fit) => alpha_upper_limit(&fit, confidence).map(Some),
                Err(Error::SelectionEmpty { .. } | Error::InsufficientData(_)) => Ok(None),
                Err(e) => Err(e),
            }
        }
        Method::Bayes => {
            let s = harmonic_sum(spectrum.bins());
            alpha_credible_limit(total_counts(spectrum), s, confidence).map(Some)
        }
    }
}

/// Per-trial α limits at several confidence levels on one shared trial set.
/// Entry `[level][trial]`.
pub fn trial_limits(
    config: &SynthConfig,
    trials: usize,
    method: Method,
    confidences: &[f64],
) -> Result<Vec<Vec<Option<f64>>>> {
    config.validate()?;
    for &cl in confidences {
        require_open_unit("confidence", cl)?;
    }
    let grid = config.binning()?;
    let mut out = vec![Vec::with_capacity(trials); confidences.len()];
    for t in 0..trials {
        let spectrum = sample_on(config, &grid, &mut trial_rng(config.seed, t))?;
        for (level, &cl) in out.iter_mut().zip(confidences) {
            level.push(alpha_limit(&spectrum, config, method, cl)?);
        }
    }
    Ok(out)
}

pub fn run_coverage_levels(
    config: &SynthConfig,
    trials: usize,
    method: Method,
    confidences: &[f64],
) -> Result<Vec<CoverageReport>> {
    if trials == 0 {
        return Err(Error::Validation("coverage needs at least one trial".into()));
    }
    let limits = trial_limits(config, trials, method, confidences)?;
    Ok(limits
        .iter()
        .zip(confidences)
        .map(|(level, &confidence)| {
            let evaluated: Vec<f64> = level.iter().flatten().copied().collect();
            let covered = evaluated.iter().filter(|&&l| l >= config.alpha_true).count();
            let n = evaluated.len();
            CoverageReport {
                trials: n,
                covered,
                skipped: trials - n,
                coverage_fraction: if n == 0 { 0.0 } else { covered as f64 / n as f64 },
                method,
                confidence,
                seed: config.seed,
                alpha_true: config.alpha_true,
            }
        })
        .collect())
}

pub fn run_coverage(config: &SynthConfig, trials: usize, method: Method, confidence: f64) -> Result<CoverageReport> {
    Ok(run_coverage_levels(config, trials, method, &[confidence])?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::reg_inc_gamma_upper;

    #[test]
    fn zero_rate_gives_empty_counts() {
        let cfg = SynthConfig { alpha_true: 0.0, ..Default::default() };
        let s = sample_spectrum(&cfg).unwrap();
        assert_eq!(s.len(), 34);
        assert_eq!(total_counts(&s), 0);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let cfg = SynthConfig::default();
        assert_eq!(sample_spectrum(&cfg).unwrap(), sample_spectrum(&cfg).unwrap());
        let other = SynthConfig { seed: 43, ..cfg };
        assert_ne!(sample_spectrum(&cfg).unwrap().bins(), sample_spectrum(&other).unwrap().bins());
    }

    #[test]
    fn mean_total_matches_harmonic_expectation() {
        let cfg = SynthConfig::default();
        let n = 10_000;
        let total: u64 = (0..n).map(|t| total_counts(&trial_spectrum(&cfg, t).unwrap())).sum();
        let mean = total as f64 / n as f64;
        let expected = 115.0 * (15..=48).map(|k| 1.0 / k as f64).sum::<f64>();
        assert!((mean - expected).abs() < 3.0 * (expected / n as f64).sqrt(), "mean {mean} vs {expected}");
    }

    /// Chi-square goodness of fit of the sampler against the exact pmf.
    fn check_poisson_pmf(mean: f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000usize;
        let lo = (mean - 5.0 * mean.sqrt()).max(0.0).floor() as u64;
        let hi = (mean + 5.0 * mean.sqrt()).ceil() as u64 + 1;
        let mut hist = vec![0usize; (hi - lo + 1) as usize];
        for _ in 0..n {
            let k = sample_poisson(&mut rng, mean).clamp(lo, hi);
            hist[(k - lo) as usize] += 1;
        }
        // Expected mass per cell from the regularized gamma: P(X <= k) = Q(k+1, mean).
        let cdf = |k: i64| if k < 0 { 0.0 } else { reg_inc_gamma_upper(k as f64 + 1.0, mean).unwrap() };
        let mut stat = 0.0;
        let mut dof = 0;
        for (i, &obs) in hist.iter().enumerate() {
            let k = lo as i64 + i as i64;
            let p = if k == lo as i64 {
                cdf(k)
            } else if k == hi as i64 {
                1.0 - cdf(k - 1)
            } else {
                cdf(k) - cdf(k - 1)
            };
            let e = p * n as f64;
            if e > 5.0 {
                stat += (obs as f64 - e).powi(2) / e;
                dof += 1;
            }
        }
        // Generous bound: mean + 6 standard deviations of a χ²(dof).
        let bound = dof as f64 + 6.0 * (2.0 * dof as f64).sqrt();
        assert!(stat < bound, "mean {mean}: χ² {stat} over {dof} cells");
    }

    #[test]
    fn poisson_inversion_branch_matches_pmf() {
        check_poisson_pmf(0.7);
        check_poisson_pmf(7.66);
    }

    #[test]
    fn poisson_ptrs_branch_matches_pmf() {
        check_poisson_pmf(30.0);
        check_poisson_pmf(250.0);
    }

    #[test]
    fn single_trial_coverage() {
        let r = run_coverage(&SynthConfig::default(), 1, Method::Bayes, 0.95).unwrap();
        assert_eq!(r.trials, 1);
        assert!(r.covered <= 1);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(run_coverage(&SynthConfig::default(), 0, Method::Bayes, 0.95).is_err());
    }

    #[test]
    fn background_inflates_limits() {
        let clean = SynthConfig::default();
        let noisy = SynthConfig { flat_background_per_bin: 2.0, ..clean };
        for method in [Method::Bayes, Method::Chi2] {
            let a = trial_limits(&clean, 300, method, &[0.95]).unwrap().remove(0);
            let b = trial_limits(&noisy, 300, method, &[0.95]).unwrap().remove(0);
            let mean = |v: &[Option<f64>]| {
                let xs: Vec<f64> = v.iter().flatten().copied().collect();
                xs.iter().sum::<f64>() / xs.len() as f64
            };
            assert!(mean(&b) > mean(&a), "{method}");
            if method == Method::Bayes {
                assert!(a.iter().zip(&b).all(|(x, y)| y.unwrap() >= x.unwrap()));
            }
        }
    }

    #[test]
    fn chi2_skips_sparse_trials() {
        let cfg = SynthConfig { alpha_true: 2.0, ..Default::default() };
        let r = run_coverage(&cfg, 20, Method::Chi2, 0.95).unwrap();
        assert_eq!(r.skipped + r.trials, 20);
        assert!(r.skipped > 0);
    }
}
