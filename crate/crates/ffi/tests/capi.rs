use std::ffi::{c_char, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use csl_limits_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { csl_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(511)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn c_exp() -> f64 {
    let mut out = 0.0;
    assert_eq!(unsafe { csl_exposure_factor(csl_exposure_default(), &mut out) }, CslStatus::Ok);
    out
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

#[test]
fn exposure_and_coupling() {
    assert!((c_exp() / 1.719_014_4e33 - 1.0).abs() < 1e-12);
    let mut d = 0.0;
    assert_eq!(unsafe { csl_coupling(CslCoupling::MassProportional, 1e-7, &mut d) }, CslStatus::Ok);
    assert!((d / 1.027e-20 - 1.0).abs() < 3e-3);

    let mut lambda = 0.0;
    let status = unsafe { csl_lambda_from_alpha(143.0, CslCoupling::MassProportional, 1e-7, c_exp(), &mut lambda) };
    assert_eq!(status, CslStatus::Ok);
    assert!((lambda / 8.1e-12 - 1.0).abs() < 0.02);
}

#[test]
fn bayes_limit_from_published_total() {
    let centers: Vec<f64> = (15..=48).map(f64::from).collect();
    let counts = vec![0u64; centers.len()];
    let mut grid = ptr::null_mut();
    let status = unsafe { csl_spectrum_from_bins(centers.as_ptr(), counts.as_ptr(), centers.len(), 1.0, &mut grid) };
    assert_eq!(status, CslStatus::Ok);
    let mut s = 0.0;
    assert_eq!(unsafe { csl_spectrum_harmonic_sum(grid, &mut s) }, CslStatus::Ok);
    unsafe { csl_spectrum_free(grid) };

    let mut mass = CslBayesLimit::default();
    let mut non = CslBayesLimit::default();
    unsafe {
        assert_eq!(csl_bayes_lambda_limit(130, s, CslCoupling::MassProportional, 1e-7, c_exp(), 0.95, &mut mass), CslStatus::Ok);
        assert_eq!(csl_bayes_lambda_limit(130, s, CslCoupling::NonMassProportional, 1e-7, c_exp(), 0.95, &mut non), CslStatus::Ok);
    }
    assert!((mass.lambda_upper / 6.8e-12 - 1.0).abs() < 0.1);
    assert!((non.lambda_upper / 2.0e-18 - 1.0).abs() < 0.1);
    assert!((mass.lambda_cap - 150.377_355).abs() < 1e-4);
}

#[test]
fn spectrum_handle_lifecycle() {
    let path = CString::new(fixture("synth_igex_like.csv").to_str().unwrap()).unwrap();
    let mut spec = ptr::null_mut();
    assert_eq!(unsafe { csl_spectrum_load(path.as_ptr(), &mut spec) }, CslStatus::Ok);
    assert!(!spec.is_null());

    let (mut len, mut total) = (0usize, 0u64);
    unsafe {
        assert_eq!(csl_spectrum_len(spec, &mut len), CslStatus::Ok);
        assert_eq!(csl_spectrum_total_counts(spec, &mut total), CslStatus::Ok);
    }
    assert_eq!((len, total), (34, 133));

    let mut bin = CslBin::default();
    assert_eq!(unsafe { csl_spectrum_bin(spec, 0, &mut bin) }, CslStatus::Ok);
    assert_eq!((bin.center, bin.width), (15.0, 1.0));
    assert_eq!(unsafe { csl_spectrum_bin(spec, 34, &mut bin) }, CslStatus::Validation);
    assert!(last_error().contains("out of range"));

    let mut kept = ptr::null_mut();
    assert_eq!(unsafe { csl_spectrum_select(spec, 14.5, 48.5, 5, &mut kept) }, CslStatus::Ok);
    let mut fit = CslFit::default();
    assert_eq!(unsafe { csl_fit_alpha(kept, &mut fit) }, CslStatus::Ok);
    assert!(((fit.alpha_hat - 115.0) / fit.sigma_alpha).abs() < 3.0);

    let mut upper = 0.0;
    assert_eq!(unsafe { csl_alpha_upper_bound(fit.alpha_hat, fit.sigma_alpha, 0.95, &mut upper) }, CslStatus::Ok);
    assert!(upper > fit.alpha_hat);

    let dir = tempfile::tempdir().unwrap();
    let saved = CString::new(dir.path().join("s.csv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { csl_spectrum_save(kept, saved.as_ptr()) }, CslStatus::Ok);
    let mut reloaded = ptr::null_mut();
    assert_eq!(unsafe { csl_spectrum_load(saved.as_ptr(), &mut reloaded) }, CslStatus::Ok);
    let mut n = 0;
    unsafe { csl_spectrum_len(reloaded, &mut n) };
    assert_eq!(n, fit.n_bins);

    unsafe {
        csl_spectrum_free(reloaded);
        csl_spectrum_free(kept);
        csl_spectrum_free(spec);
        csl_spectrum_free(ptr::null_mut());
    }
}

#[test]
fn sampling_is_deterministic() {
    let cfg = CslSynthConfig { alpha_true: 115.0, e_min: 14.5, e_max: 48.5, bin_width: 1.0, flat_background_per_bin: 0.0, seed: 42 };
    let totals: Vec<u64> = (0..2)
        .map(|_| {
            let mut h = ptr::null_mut();
            assert_eq!(unsafe { csl_spectrum_sample(cfg, &mut h) }, CslStatus::Ok);
            let mut t = 0;
            unsafe {
                csl_spectrum_total_counts(h, &mut t);
                csl_spectrum_free(h);
            }
            t
        })
        .collect();
    assert_eq!(totals, vec![133, 133]);
}

#[test]
fn status_codes() {
    let mut out = 0.0;
    unsafe {
        assert_eq!(csl_reg_inc_gamma(1.0, 1.0, ptr::null_mut()), CslStatus::NullPointer);
        assert!(last_error().contains("out"));
        assert_eq!(csl_reg_inc_gamma(-1.0, 1.0, &mut out), CslStatus::Validation);
        assert_eq!(csl_reg_inc_gamma(1.0, 1.0, &mut out), CslStatus::Ok);
        assert_eq!(csl_last_error_message(ptr::null_mut(), 0), 0);
        assert!((out - (1.0 - (-1.0f64).exp())).abs() < 1e-15);

        let missing = CString::new("/nonexistent/x.csv").unwrap();
        let mut h = ptr::null_mut();
        assert_eq!(csl_spectrum_load(missing.as_ptr(), &mut h), CslStatus::Io);
        assert!(h.is_null());
        assert_eq!(csl_spectrum_load(ptr::null(), &mut h), CslStatus::NullPointer);
        assert_eq!(csl_spectrum_len(ptr::null(), &mut 0), CslStatus::NullPointer);
    }
}

#[test]
fn error_message_truncates() {
    unsafe { csl_normal_quantile(2.0, &mut 0.0) };
    let full = unsafe { csl_last_error_message(ptr::null_mut(), 0) };
    assert!(full > 8);
    let mut small = [1 as c_char; 8];
    let n = unsafe { csl_last_error_message(small.as_mut_ptr(), small.len()) };
    assert_eq!(n, full);
    assert_eq!(small[7], 0);
}

#[test]
fn quantiles() {
    let (mut q, mut p, mut z) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(csl_gamma_quantile(131.0, 0.95, &mut q), CslStatus::Ok);
        assert_eq!(csl_reg_inc_gamma(131.0, q, &mut p), CslStatus::Ok);
        assert_eq!(csl_normal_quantile(0.95, &mut z), CslStatus::Ok);
    }
    assert!((p - 0.95).abs() < 1e-12);
    assert!((z - 1.644_853_626_951_472_7).abs() < 1e-9);
}

#[test]
fn scan_has_slope_two() {
    let grid = [1e-8, 1e-7, 1e-6];
    let mut out = [0.0; 3];
    assert_eq!(unsafe { csl_scan(7e-12, 1e-7, grid.as_ptr(), 3, out.as_mut_ptr()) }, CslStatus::Ok);
    assert_eq!(out[1], 7e-12);
    assert!((out[0] / 7e-14 - 1.0).abs() < 1e-12);
    assert!((out[2] / 7e-10 - 1.0).abs() < 1e-12);
    assert_eq!(unsafe { csl_scan(7e-12, 1e-7, ptr::null(), 3, out.as_mut_ptr()) }, CslStatus::NullPointer);
}

#[test]
fn header_declares_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/csl_limits.h")).unwrap();
    for name in [
        "typedef struct CslSpectrum CslSpectrum;",
        "CSL_STATUS_NUMERICAL = 4",
        "csl_spectrum_load(",
        "csl_spectrum_free(",
        "csl_spectrum_select(",
        "csl_fit_alpha(",
        "csl_bayes_lambda_limit(",
        "csl_last_error_message(",
        "csl_scan(",
        "csl_reg_inc_gamma(",
        "csl_gamma_quantile(",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

/// Compiles and runs `examples/limits.c` against the static library when a C compiler is present.
#[test]
fn c_example_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libcsl_limits_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("limits");
    let status = Command::new(cc)
        .arg(format!("-I{}", manifest.join("include").display()))
        .arg(manifest.join("examples/limits.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let value = |key: &str| -> f64 {
        text.lines().find_map(|l| l.strip_prefix(&format!("{key}="))).unwrap().parse().unwrap()
    };
    assert!((value("lambda_mass") / 7.006e-12 - 1.0).abs() < 1e-3);
    assert_eq!(value("total"), 133.0);
    assert_eq!(value("bad_shape_status"), 2.0);
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().map(|o| o.status.success()).unwrap_or(false))
        .ok_or(())
}
