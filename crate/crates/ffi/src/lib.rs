//! C API over `csl_limits`.
//!
//! Every function returns a [`CslStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and can be read with
//! [`csl_last_error_message`]. Spectra are opaque [`CslSpectrum`] handles
//! released with [`csl_spectrum_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use csl_limits::bayes::{harmonic_sum, lambda_credible_limit, PosteriorSpec};
use csl_limits::chi2::{fit_alpha, upper_bound};
use csl_limits::rate::{alpha_per_lambda, lambda_from_alpha};
use csl_limits::scan::{scan, Method};
use csl_limits::special::{gamma_quantile, normal_quantile, reg_inc_gamma};
use csl_limits::spectrum::{load_spectrum, select, total_counts};
use csl_limits::synth::{sample_spectrum, SynthConfig};
use csl_limits::units::exposure_factor;
use csl_limits::{
    AlphaCoefficient, BinnedSpectrum, CouplingMode, Error, ErrorClass, ExposureConfig, PhysicalConstants,
    RangeSelection,
};

/// Status codes. 2, 3 and 4 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CslStatus {
    Ok = 0,
    NullPointer = 1,
    Validation = 2,
    Io = 3,
    Numerical = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CslCoupling {
    MassProportional = 0,
    NonMassProportional = 1,
}

impl From<CslCoupling> for CouplingMode {
    fn from(c: CslCoupling) -> Self {
        match c {
            CslCoupling::MassProportional => CouplingMode::MassProportional,
            CslCoupling::NonMassProportional => CouplingMode::NonMassProportional,
        }
    }
}

/// Opaque spectrum handle.
pub struct CslSpectrum {
    inner: BinnedSpectrum,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CslBin {
    /// keV.
    pub center: f64,
    /// keV.
    pub width: f64,
    pub counts: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CslFit {
    pub alpha_hat: f64,
    pub sigma_alpha: f64,
    pub chi2: f64,
    pub reduced_chi2: f64,
    pub n_bins: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CslExposure {
    pub atoms_per_kg: f64,
    pub exposure_kg_day: f64,
    pub seconds_per_day: f64,
    pub electrons_per_atom: f64,
}

impl From<CslExposure> for ExposureConfig {
    fn from(e: CslExposure) -> Self {
        ExposureConfig {
            atoms_per_kg: e.atoms_per_kg,
            exposure_kg_day: e.exposure_kg_day,
            seconds_per_day: e.seconds_per_day,
            electrons_per_atom: e.electrons_per_atom,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CslSynthConfig {
    pub alpha_true: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub bin_width: f64,
    pub flat_background_per_bin: f64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CslBayesLimit {
    /// s⁻¹.
    pub lambda_upper: f64,
    pub lambda_cap: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type FfiResult<T> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> CslStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CslStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer: {name}"));
            CslStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            match e.class() {
                ErrorClass::Validation => CslStatus::Validation,
                ErrorClass::Io => CslStatus::Io,
                ErrorClass::Numerical => CslStatus::Numerical,
            }
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(format!("panic: {msg}"));
            CslStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &'static str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or(Failure::Null(name))
}

unsafe fn in_ref<'a, T>(p: *const T, name: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn in_str<'a>(p: *const c_char, name: &'static str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure::Core(Error::Validation(format!("{name} is not UTF-8: {e}"))))
}

fn boxed(spectrum: BinnedSpectrum) -> *mut CslSpectrum {
    Box::into_raw(Box::new(CslSpectrum { inner: spectrum }))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn csl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length
/// excluding the terminator, or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn csl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let Some(msg) = slot.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// The default germanium exposure (80 kg·day, 30 electrons per atom).
#[no_mangle]
pub extern "C" fn csl_exposure_default() -> CslExposure {
    let d = ExposureConfig::default();
    CslExposure {
        atoms_per_kg: d.atoms_per_kg,
        exposure_kg_day: d.exposure_kg_day,
        seconds_per_day: d.seconds_per_day,
        electrons_per_atom: d.electrons_per_atom,
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csl_exposure_factor(exposure: CslExposure, out: *mut f64) -> CslStatus {
    guard(|| {
        *out_ref(out, "out")? = exposure_factor(&exposure.into())?;
        Ok(())
    })
}

/// Rate coefficient D at `r_c` metres.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csl_coupling(coupling: CslCoupling, r_c: f64, out: *mut f64) -> CslStatus {
    guard(|| {
        *out_ref(out, "out")? = PhysicalConstants::default().coupling(coupling.into(), r_c)?;
        Ok(())
    })
}

/// α per unit λ (counts·keV·s).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csl_alpha_per_lambda(
    coupling: CslCoupling,
    r_c: f64,
    c_exp: f64,
    out: *mut f64,
) -> CslStatus {
    guard(|| {
        *out_ref(out, "out")? = alpha_per_lambda(&PhysicalConstants::default(), r_c, coupling.into(), c_exp)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csl_lambda_from_alpha(
    alpha: f64,
    coupling: CslCoupling,
    r_c: f64,
    c_exp: f64,
    out: *mut f64,
) -> CslStatus {
    guard(|| {
        let alpha = AlphaCoefficient::new(alpha)?;
        *out_ref(out, "out")? = lambda_from_alpha(&PhysicalConstants::default(), alpha, r_c, coupling.into(), c_exp)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer. On
/// success `*out` owns a handle to release with [`csl_spectrum_free`].
#[no_mangle]
pub unsafe extern "C" fn csl_spectrum_load(path: *const c_char, out: *mut *mut CslSpectrum) -> CslStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        *out = boxed(load_spectrum(in_str(path, "path")?)?);
        Ok(())
    })
}

/// Builds a spectrum from `n` bins of common `width`.
///
/// # Safety
/// `centers` and `counts` must point to `n` readable elements; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn csl_spectrum_from_bins(
    centers: *const f64,
    counts: *const u64,
    n: usize,
    width: f64,
    out: *mut *mut CslSpectrum,
) -> CslStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        if n > 0 && centers.is_null() {
            return Err(Failure::Null("centers"));
        }
        if n > 0 && counts.is_null() {
            return Err(Failure::Null("counts"));
        }
        let (centers, counts) = if n == 0 {
            (&[][..], &[][..])
        } else {
            (std::slice::from_raw_parts(centers, n), std::slice::from_raw_parts(counts, n))
        };
        let bins = centers
            .iter()
            .zip(counts)
            .map(|(&c, &y)| csl_limits::EnergyBin::new(c, width, y))
            .collect::<csl_limits::Result<Vec<_>>>()?;
        *out = boxed(BinnedSpectrum::new(bins)?);
        Ok(())
    })
}

/// Draws a synthetic spectrum.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csl_spectrum_sample(config: CslSynthConfig, out: *mut *mut CslSpectrum) -> CslStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let cfg = SynthConfig {
            alpha_true: config.alpha_true,
            e_min: config.e_min,
            e_max: config.e_max,
            bin_width: config.bin_width,
            flat_background_per_bin: config.flat_background_per_bin,
            seed: config.seed,
        };
        *out = boxed(sample_spectrum(&cfg)?);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `spectrum` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn csl_spectrum_free(spectrum: *mut CslSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// # Safety
/// `spectrum` must be a live handle or null; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csl_spectrum_len(spectrum: *const CslSpectrum, out: *mut usize) -> CslStatus {
    guard(|| {
        *out_ref(out, "out")? = in_ref(spectrum, "spectrum")?.inner.len();
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be a live handle or null; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csl_spectrum_total_counts(spectrum: *const CslSpectrum, out: *mut u64) -> CslStatus {
    guard(|| {
        *out_ref(out, "out")? = total_counts(&in_ref(spectrum, "spectrum")?.inner);
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be a live handle or null; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csl_spectrum_bin(spectrum: *const CslSpectrum, index: usize, out: *mut CslBin) -> CslStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let bins = in_ref(spectrum, "spectrum")?.inner.bins();
        let b = bins.get(index).ok_or_else(|| {
            Failure::Core(Error::Validation(format!("bin index {index} out of range for {} bins", bins.len())))
        })?;
        *out = CslBin { center: b.center, width: b.width, counts: b.counts };
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be a live handle or null; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn csl_spectrum_save(spectrum: *const CslSpectrum, path: *const c_char) -> CslStatus {
    guard(|| {
        in_ref(spectrum, "spectrum")?.inner.save(in_str(path, "path")?)?;
        Ok(())
    })
}

/// Keeps bins with centers in `[e_min, e_max]` and at least `min_counts`
/// counts, as a new handle.
///
/// # Safety
/// `spectrum` must be a live handle or null; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csl_spectrum_select(
    spectrum: *const CslSpectrum,
    e_min: f64,
    e_max: f64,
    min_counts: u64,
    out: *mut *mut CslSpectrum,
) -> CslStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let sel = RangeSelection::new(e_min, e_max, min_counts)?;
        *out = boxed(select(&in_ref(spectrum, "spectrum")?.inner, &sel)?);
        Ok(())
    })
}

/// Σ width/E over the bins, in keV⁻¹.
///
/// # Safety
/// `spectrum` must be a live handle or null; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csl_spectrum_harmonic_sum(spectrum: *const CslSpectrum, out: *mut f64) -> CslStatus {
    guard(|| {
        *out_ref(out, "out")? = harmonic_sum(in_ref(spectrum, "spectrum")?.inner.bins());
        Ok(())
    })
}

/// Weighted least-squares fit of α/E to every bin of `spectrum`.
///
/// # Safety
/// `spectrum` must be a live handle or null; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csl_fit_alpha(spectrum: *const CslSpectrum, out: *mut CslFit) -> CslStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let fit = fit_alpha(&in_ref(spectrum, "spectrum")?.inner)?;
        *out = CslFit {
            alpha_hat: fit.alpha_hat,
            sigma_alpha: fit.sigma_alpha,
            chi2: fit.chi2,
            reduced_chi2: fit.reduced_chi2,
            n_bins: fit.n_bins,
        };
        Ok(())
    })
}

/// One-sided Gaussian bound `alpha_hat + z(confidence) * sigma_alpha`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csl_alpha_upper_bound(
    alpha_hat: f64,
    sigma_alpha: f64,
    confidence: f64,
    out: *mut f64,
) -> CslStatus {
    guard(|| {
        *out_ref(out, "out")? = upper_bound(alpha_hat, sigma_alpha, confidence)?;
        Ok(())
    })
}

/// Flat-prior credible upper limit on λ from a total count.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csl_bayes_lambda_limit(
    y_total: u64,
    harmonic: f64,
    coupling: CslCoupling,
    r_c: f64,
    c_exp: f64,
    confidence: f64,
    out: *mut CslBayesLimit,
) -> CslStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let conversion = alpha_per_lambda(&PhysicalConstants::default(), r_c, coupling.into(), c_exp)?;
        let limit = lambda_credible_limit(&PosteriorSpec::new(y_total, harmonic, conversion)?, confidence)?;
        *out = CslBayesLimit { lambda_upper: limit.lambda_upper, lambda_cap: limit.lambda_cap };
        Ok(())
    })
}

/// Maps a limit `lambda_ref` found at `r_ref` onto `n` correlation lengths.
///
/// # Safety
/// `grid` must point to `n` readable and `out` to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn csl_scan(
    lambda_ref: f64,
    r_ref: f64,
    grid: *const f64,
    n: usize,
    out: *mut f64,
) -> CslStatus {
    guard(|| {
        if grid.is_null() {
            return Err(Failure::Null("grid"));
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let grid = std::slice::from_raw_parts(grid, n);
        let curve = scan(lambda_ref, r_ref, grid, CouplingMode::MassProportional, Method::Bayes, 0.95)?;
        let out = std::slice::from_raw_parts_mut(out, n);
        for (slot, p) in out.iter_mut().zip(&curve.points) {
            *slot = p.lambda_limit;
        }
        Ok(())
    })
}

/// Regularized lower incomplete gamma P(shape, x).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csl_reg_inc_gamma(shape: f64, x: f64, out: *mut f64) -> CslStatus {
    guard(|| {
        *out_ref(out, "out")? = reg_inc_gamma(shape, x)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csl_gamma_quantile(shape: f64, p: f64, out: *mut f64) -> CslStatus {
    guard(|| {
        *out_ref(out, "out")? = gamma_quantile(shape, p)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csl_normal_quantile(p: f64, out: *mut f64) -> CslStatus {
    guard(|| {
        *out_ref(out, "out")? = normal_quantile(p)?;
        Ok(())
    })
}
