//! Command-line front end: `fit`, `limit`, `scan`, `synth`, `coverage`.
//!
//! Exit codes: 0 success, 2 validation error, 3 I/O error, 4 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bayes::{harmonic_sum, lambda_credible_limit, PosteriorSpec};
use crate::chi2::{alpha_upper_limit, fit_alpha, upper_bound};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::rate::{alpha_per_lambda, lambda_from_alpha, AlphaCoefficient};
use crate::scan::{builtin_reference_points, load_overlay_boundary, log_grid, scan, write_curves, Method};
use crate::spectrum::{load_spectrum, select, total_counts, BinnedSpectrum, RangeSelection};
use crate::svg::exclusion_plot;
use crate::synth::{run_coverage, sample_spectrum, CoverageReport, SynthConfig};
use crate::units::{exposure_factor, CouplingMode};

#[derive(Debug, Parser)]
#[command(name = "csl-limits", version, about = "Upper limits on the CSL collapse rate from X-ray spectra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit α/E to a spectrum and report the one-sided bound on α.
    Fit(FitArgs),
    /// Upper limit on λ at one correlation length.
    Limit(LimitArgs),
    /// Exclusion curves over a grid of correlation lengths.
    Scan(ScanArgs),
    /// Write a synthetic Poisson spectrum.
    Synth(SynthArgs),
    /// Frequentist coverage of a limit procedure on synthetic spectra.
    Coverage(CoverageArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RangeArgs {
    /// Lower end of the energy window (keV).
    #[arg(long, default_value_t = 14.5)]
    pub emin: f64,
    /// Upper end of the energy window (keV).
    #[arg(long, default_value_t = 48.5)]
    pub emax: f64,
    /// Minimum counts per bin for the χ² fit.
    #[arg(long, default_value_t = 5)]
    pub min_counts: u64,
}

#[derive(Debug, Clone, Args)]
pub struct PhysicsArgs {
    /// key=value file overriding constants and exposure factors.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub exposure_kg_day: Option<f64>,
    #[arg(long)]
    pub electrons_per_atom: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub range: RangeArgs,
    #[arg(long, default_value_t = 0.95)]
    pub cl: f64,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct LimitInputs {
    /// Spectrum CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Total observed counts (with --bins, Bayesian route only).
    #[arg(long)]
    pub y_total: Option<u64>,
    /// Bin centers as first:last:width in keV, e.g. 15:48:1.
    #[arg(long)]
    pub bins: Option<String>,
    /// Upper bound on α supplied directly (χ² route only).
    #[arg(long)]
    pub alpha_upper: Option<f64>,
    /// Correlation length in metres.
    #[arg(long = "r-c", default_value_t = 1e-7)]
    pub r_c: f64,
    /// mass-prop or non-mass-prop; both when omitted.
    #[arg(long, value_parser = parse_coupling)]
    pub coupling: Option<CouplingMode>,
    #[arg(long, value_parser = parse_method, default_value = "bayes")]
    pub method: Method,
    #[arg(long, default_value_t = 0.95)]
    pub cl: f64,
    #[command(flatten)]
    pub range: RangeArgs,
    #[command(flatten)]
    pub physics: PhysicsArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LimitArgs {
    #[command(flatten)]
    pub inputs: LimitInputs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub inputs: LimitInputs,
    /// lo:hi:n log-spaced, or a comma-separated list of r_C values (m).
    #[arg(long, default_value = "1e-9:1e-3:200")]
    pub grid: String,
    /// Curve CSV output.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Boundary polyline (r_c_m,lambda_s_inv) drawn on the plot.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthSpec {
    #[arg(long, default_value_t = 115.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 14.5)]
    pub emin: f64,
    #[arg(long, default_value_t = 48.5)]
    pub emax: f64,
    #[arg(long, default_value_t = 1.0)]
    pub bin_width: f64,
    /// Expected flat background counts per bin.
    #[arg(long, default_value_t = 0.0)]
    pub background: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

impl SynthSpec {
    fn config(&self) -> SynthConfig {
        SynthConfig {
            alpha_true: self.alpha,
            e_min: self.emin,
            e_max: self.emax,
            bin_width: self.bin_width,
            flat_background_per_bin: self.background,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub spec: SynthSpec,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub spec: SynthSpec,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, value_parser = parse_method, default_value = "bayes")]
    pub method: Method,
    #[arg(long, default_value_t = 0.95)]
    pub cl: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_coupling(s: &str) -> std::result::Result<CouplingMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// JSON shape of a `fit` result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub alpha_hat: f64,
    pub sigma_alpha: f64,
    pub chi2: f64,
    pub ndf: usize,
    pub reduced_chi2: f64,
    pub alpha_upper: f64,
    pub confidence: f64,
    pub n_bins: usize,
}

/// JSON shape of one `limit` result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub method: Method,
    pub coupling: CouplingMode,
    pub r_c_m: f64,
    pub confidence: f64,
    pub lambda_upper_s_inv: f64,
    pub exposure_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub y_total: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub harmonic_sum: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha_upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma_alpha: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageOutput {
    pub trials: usize,
    pub covered: usize,
    pub skipped: usize,
    pub coverage_fraction: f64,
    pub method: Method,
    pub confidence: f64,
    pub seed: u64,
    pub alpha_true: f64,
}

impl From<CoverageReport> for CoverageOutput {
    fn from(r: CoverageReport) -> Self {
        CoverageOutput {
            trials: r.trials,
            covered: r.covered,
            skipped: r.skipped,
            coverage_fraction: r.coverage_fraction,
            method: r.method,
            confidence: r.confidence,
            seed: r.seed,
            alpha_true: r.alpha_true,
        }
    }
}

/// Machine-readable error object written on failure.
pub fn error_json(err: &Error) -> String {
    serde_json::json!({
        "error": {
            "kind": err.kind(),
            "message": err.to_string(),
            "exit_code": err.class().exit_code(),
        }
    })
    .to_string()
}

fn selection(range: &RangeArgs, min_counts: u64) -> Result<RangeSelection> {
    RangeSelection::new(range.emin, range.emax, min_counts)
}

fn run_config(physics: &PhysicsArgs) -> Result<RunConfig> {
    let mut cfg = match &physics.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = physics.exposure_kg_day {
        cfg.exposure.exposure_kg_day = v;
    }
    if let Some(v) = physics.electrons_per_atom {
        cfg.exposure.electrons_per_atom = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_fit(args: &FitArgs) -> Result<FitReport> {
    let spectrum = load_spectrum(&args.input)?;
    let selected = select(&spectrum, &selection(&args.range, args.range.min_counts)?)?;
    let fit = fit_alpha(&selected)?;
    Ok(FitReport {
        alpha_hat: fit.alpha_hat,
        sigma_alpha: fit.sigma_alpha,
        chi2: fit.chi2,
        ndf: fit.ndf(),
        reduced_chi2: fit.reduced_chi2,
        alpha_upper: alpha_upper_limit(&fit, args.cl)?,
        confidence: args.cl,
        n_bins: fit.n_bins,
    })
}

/// Parses `first:last:width` bin centers.
pub fn parse_bins(spec: &str) -> Result<BinnedSpectrum> {
    let parts: Vec<&str> = spec.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Validation(format!("bad --bins '{spec}': {e}")))?;
    match nums.as_slice() {
        [first, last, width] => BinnedSpectrum::grid(*first, *last, *width),
        _ => Err(Error::Validation(format!("--bins expects first:last:width, got '{spec}'"))),
    }
}

/// Parses `lo:hi:n` (log-spaced) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |e: &dyn std::fmt::Display| Error::Validation(format!("bad --grid '{spec}': {e}"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Validation(format!("--grid expects lo:hi:n, got '{spec}'")));
        }
        let lo: f64 = parts[0].trim().parse().map_err(|e| bad(&e))?;
        let hi: f64 = parts[1].trim().parse().map_err(|e| bad(&e))?;
        let n: usize = parts[2].trim().parse().map_err(|e| bad(&e))?;
        log_grid(lo, hi, n).map_err(|e| Error::Validation(e.to_string()))
    } else {
        spec.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| bad(&e))).collect()
    }
}

struct CountsSource {
    y_total: u64,
    harmonic_sum: f64,
}

fn bayes_counts(inputs: &LimitInputs) -> Result<CountsSource> {
    if inputs.alpha_upper.is_some() {
        return Err(Error::Validation("--alpha-upper applies to --method chi2 only".into()));
    }
    match (&inputs.input, inputs.y_total, &inputs.bins) {
        (Some(path), None, None) => {
            let spectrum = load_spectrum(path)?;
            // No per-bin threshold on the Poisson route.
            let selected = select(&spectrum, &selection(&inputs.range, 0)?)?;
            Ok(CountsSource { y_total: total_counts(&selected), harmonic_sum: harmonic_sum(selected.bins()) })
        }
        (None, Some(y), Some(bins)) => {
            let grid = parse_bins(bins)?;
            Ok(CountsSource { y_total: y, harmonic_sum: harmonic_sum(grid.bins()) })
        }
        _ => Err(Error::Validation(
            "bayes limit needs either --input or both --y-total and --bins".into(),
        )),
    }
}

struct AlphaBound {
    upper: f64,
    hat: Option<f64>,
    sigma: Option<f64>,
}

fn chi2_bound(inputs: &LimitInputs) -> Result<AlphaBound> {
    if inputs.y_total.is_some() || inputs.bins.is_some() {
        return Err(Error::Validation("--y-total/--bins apply to --method bayes only".into()));
    }
    match (inputs.alpha_upper, &inputs.input) {
        (Some(upper), None) => {
            AlphaCoefficient::new(upper).map_err(|e| Error::Validation(e.to_string()))?;
            Ok(AlphaBound { upper, hat: None, sigma: None })
        }
        (None, Some(path)) => {
            let spectrum = load_spectrum(path)?;
            let selected = select(&spectrum, &selection(&inputs.range, inputs.range.min_counts)?)?;
            let fit = fit_alpha(&selected)?;
            Ok(AlphaBound {
                upper: upper_bound(fit.alpha_hat, fit.sigma_alpha, inputs.cl)?.max(0.0),
                hat: Some(fit.alpha_hat),
                sigma: Some(fit.sigma_alpha),
            })
        }
        _ => Err(Error::Validation("chi2 limit needs exactly one of --alpha-upper or --input".into())),
    }
}

/// Limits at `inputs.r_c` for the requested coupling, or both.
pub fn compute_limits(inputs: &LimitInputs) -> Result<Vec<LimitReport>> {
    if !(inputs.cl > 0.0 && inputs.cl < 1.0) {
        return Err(Error::Validation(format!("--cl must lie in (0, 1), got {}", inputs.cl)));
    }
    if !(inputs.r_c.is_finite() && inputs.r_c > 0.0) {
        return Err(Error::Validation(format!("--r-c must be > 0, got {}", inputs.r_c)));
    }
    let cfg = run_config(&inputs.physics)?;
    let c_exp = exposure_factor(&cfg.exposure)?;
    let couplings: Vec<CouplingMode> = match inputs.coupling {
        Some(c) => vec![c],
        None => CouplingMode::ALL.to_vec(),
    };

    match inputs.method {
        Method::Bayes => {
            let counts = bayes_counts(inputs)?;
            couplings
                .into_iter()
                .map(|coupling| {
                    let conversion = alpha_per_lambda(&cfg.constants, inputs.r_c, coupling, c_exp)?;
                    let spec = PosteriorSpec::new(counts.y_total, counts.harmonic_sum, conversion)?;
                    let limit = lambda_credible_limit(&spec, inputs.cl)?;
                    Ok(LimitReport {
                        method: Method::Bayes,
                        coupling,
                        r_c_m: inputs.r_c,
                        confidence: inputs.cl,
                        lambda_upper_s_inv: limit.lambda_upper,
                        exposure_factor: c_exp,
                        y_total: Some(counts.y_total),
                        harmonic_sum: Some(counts.harmonic_sum),
                        lambda_cap: Some(limit.lambda_cap),
                        alpha_upper: None,
                        alpha_hat: None,
                        sigma_alpha: None,
                    })
                })
                .collect()
        }
        Method::Chi2 => {
            let bound = chi2_bound(inputs)?;
            let alpha = AlphaCoefficient::new(bound.upper)?;
            couplings
                .into_iter()
                .map(|coupling| {
                    Ok(LimitReport {
                        method: Method::Chi2,
                        coupling,
                        r_c_m: inputs.r_c,
                        confidence: inputs.cl,
                        lambda_upper_s_inv: lambda_from_alpha(&cfg.constants, alpha, inputs.r_c, coupling, c_exp)?,
                        exposure_factor: c_exp,
                        y_total: None,
                        harmonic_sum: None,
                        lambda_cap: None,
                        alpha_upper: Some(bound.upper),
                        alpha_hat: bound.hat,
                        sigma_alpha: bound.sigma,
                    })
                })
                .collect()
        }
    }
}

fn limits_json(reports: &[LimitReport], single: bool) -> String {
    let value = if single {
        serde_json::to_value(&reports[0])
    } else {
        serde_json::to_value(reports)
    };
    serde_json::to_string_pretty(&value.expect("reports serialize")).expect("value serializes")
}

pub fn cmd_limit(args: &LimitArgs) -> Result<String> {
    let reports = compute_limits(&args.inputs)?;
    Ok(limits_json(&reports, args.inputs.coupling.is_some()))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSummary {
    pub rows: usize,
    pub curves: usize,
    pub csv: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
    pub limits: Vec<LimitReport>,
}

pub fn cmd_scan(args: &ScanArgs) -> Result<ScanSummary> {
    let grid = parse_grid(&args.grid)?;
    let overlay = match &args.overlay {
        Some(path) => load_overlay_boundary(path)?,
        None => Vec::new(),
    };
    let limits = compute_limits(&args.inputs)?;
    let curves = limits
        .iter()
        .map(|l| scan(l.lambda_upper_s_inv, l.r_c_m, &grid, l.coupling, l.method, l.confidence))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| match e {
            Error::Domain(msg) => Error::Validation(msg),
            other => other,
        })?;

    let mut csv = Vec::new();
    write_curves(&curves, &mut csv).map_err(|e| Error::io(&args.out, e))?;
    write_file(&args.out, &csv)?;
    if let Some(svg_path) = &args.svg {
        let svg = exclusion_plot(&curves, &builtin_reference_points(), &overlay);
        write_file(svg_path, svg.as_bytes())?;
    }
    Ok(ScanSummary {
        rows: curves.iter().map(|c| c.points.len()).sum(),
        curves: curves.len(),
        csv: args.out.clone(),
        svg: args.svg.clone(),
        limits,
    })
}

/// Synthetic spectrum CSV, with provenance comments.
pub fn cmd_synth(args: &SynthArgs) -> Result<String> {
    let cfg = args.spec.config();
    let spectrum = sample_spectrum(&cfg)?;
    Ok(format!(
        "# synthetic alpha/E spectrum: alpha={:?} e_min={:?} e_max={:?} bin_width={:?} background={:?} seed={}\n\
         # total_counts={}\n{}",
        cfg.alpha_true,
        cfg.e_min,
        cfg.e_max,
        cfg.bin_width,
        cfg.flat_background_per_bin,
        cfg.seed,
        total_counts(&spectrum),
        spectrum.to_csv_string()
    ))
}

pub fn cmd_coverage(args: &CoverageArgs) -> Result<CoverageOutput> {
    if !(args.cl > 0.0 && args.cl < 1.0) {
        return Err(Error::Validation(format!("--cl must lie in (0, 1), got {}", args.cl)));
    }
    Ok(run_coverage(&args.spec.config(), args.trials, args.method, args.cl)?.into())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn emit(out: &Option<PathBuf>, text: String) -> Result<Option<String>> {
    match out {
        Some(path) => {
            write_file(path, text.as_bytes())?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

/// Runs a parsed command. Returns text destined for stdout, if any.
pub fn run(cli: &Cli) -> Result<Option<String>> {
    match &cli.command {
        Command::Fit(args) => emit(&args.out, pretty(&cmd_fit(args)?)),
        Command::Limit(args) => emit(&args.out, cmd_limit(args)?),
        Command::Scan(args) => Ok(Some(pretty(&cmd_scan(args)?))),
        Command::Synth(args) => emit(&args.out, cmd_synth(args)?),
        Command::Coverage(args) => emit(&args.out, pretty(&cmd_coverage(args)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("csl-limits").chain(args.iter().copied())).unwrap()
    }

    fn limit_inputs(args: &[&str]) -> LimitInputs {
        match parse(&[&["limit"], args].concat()).command {
            Command::Limit(a) => a.inputs,
            other => panic!("parsed {other:?}"),
        }
    }

    #[test]
    fn bins_and_grid_specs() {
        assert_eq!(parse_bins("15:48:1").unwrap().len(), 34);
        assert!(parse_bins("15:48").is_err());
        assert!(parse_bins("a:b:c").is_err());
        assert_eq!(parse_grid("1e-7").unwrap(), vec![1e-7]);
        assert_eq!(parse_grid("1e-8, 1e-7").unwrap(), vec![1e-8, 1e-7]);
        assert_eq!(parse_grid("1e-9:1e-3:200").unwrap().len(), 200);
        assert!(parse_grid("1e-9:1e-3").is_err());
    }

    #[test]
    fn limit_from_published_alpha_bound() {
        let inputs = limit_inputs(&["--alpha-upper", "143", "--method", "chi2", "--coupling", "mass-prop"]);
        let r = compute_limits(&inputs).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].lambda_upper_s_inv / 8.1e-12 - 1.0).abs() < 0.02);
    }

    #[test]
    fn both_couplings_when_unspecified() {
        let inputs = limit_inputs(&["--y-total", "130", "--bins", "15:48:1"]);
        let r = compute_limits(&inputs).unwrap();
        assert_eq!(r.iter().map(|l| l.coupling).collect::<Vec<_>>(), CouplingMode::ALL.to_vec());
    }

    #[test]
    fn conflicting_inputs_are_rejected() {
        for args in [
            &["--y-total", "130"][..],
            &["--alpha-upper", "143"][..],
            &["--method", "chi2", "--y-total", "130", "--bins", "15:48:1"][..],
            &["--method", "chi2"][..],
            &["--y-total", "130", "--bins", "15:48:1", "--cl", "1.5"][..],
            &["--y-total", "130", "--bins", "15:48:1", "--exposure-kg-day", "0"][..],
        ] {
            let err = compute_limits(&limit_inputs(args)).unwrap_err();
            assert_eq!(err.class().exit_code(), 2, "{args:?}: {err}");
        }
    }

    #[test]
    fn electrons_override_scales_limit() {
        let base = compute_limits(&limit_inputs(&["--alpha-upper", "143", "--method", "chi2"])).unwrap();
        let four = compute_limits(&limit_inputs(&[
            "--alpha-upper", "143", "--method", "chi2", "--electrons-per-atom", "4",
        ]))
        .unwrap();
        let ratio = four[0].lambda_upper_s_inv / base[0].lambda_upper_s_inv;
        assert!((ratio - 7.5).abs() < 1e-12);
    }

    #[test]
    fn error_object_shape() {
        let v: serde_json::Value = serde_json::from_str(&error_json(&Error::Numerical("x".into()))).unwrap();
        assert_eq!(v["error"]["kind"], "numerical");
        assert_eq!(v["error"]["exit_code"], 4);
    }
}
