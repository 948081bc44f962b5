//! Exclusion curves in the λ–r_C plane.
//!
//! Every limit scales as `λ_limit(r) = λ_ref · (r / r_ref)²`, so a curve is a
//! straight line of slope 2 in log-log. The region above the curve is excluded.
//! The white-noise 1/E rate has a limited range of validity in r_C; the grid
//! is not clamped to it.

use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{require_open_unit, require_positive, Error, Result};
use crate::units::CouplingMode;

pub const CURVE_CSV_HEADER: &str = "r_c_m,lambda_limit_s_inv,coupling,method,confidence";
pub const OVERLAY_CSV_HEADER: &str = "r_c_m,lambda_s_inv";

pub const DEFAULT_GRID_MIN: f64 = 1e-9;
pub const DEFAULT_GRID_MAX: f64 = 1e-3;
pub const DEFAULT_GRID_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Chi2,
    Bayes,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Chi2 => "chi2",
            Method::Bayes => "bayes",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chi2" => Ok(Method::Chi2),
            "bayes" => Ok(Method::Bayes),
            other => Err(Error::Validation(format!("unknown method '{other}' (expected chi2 or bayes)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r_c: f64,
    pub lambda_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionCurve {
    pub coupling: CouplingMode,
    pub points: Vec<CurvePoint>,
    pub method: Method,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub label: String,
    pub lambda: f64,
    pub r_c: f64,
}

/// A labelled family of literature values. A band carries its endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFamily {
    pub label: String,
    pub central: ReferencePoint,
    pub band: Option<(ReferencePoint, ReferencePoint)>,
}

impl ReferenceFamily {
    pub fn points(&self) -> Vec<&ReferencePoint> {
        let mut out = vec![&self.central];
        if let Some((lo, hi)) = &self.band {
            out.push(lo);
            out.push(hi);
        }
        out
    }
}

/// GRW (λ = 1e-16 s⁻¹) and Adler (λ = 1e-8 s⁻¹, band 1e-10..1e-6), both at r_C = 1e-7 m.
pub fn builtin_reference_points() -> Vec<ReferenceFamily> {
    let point = |label: &str, lambda: f64| ReferencePoint { label: label.to_string(), lambda, r_c: 1e-7 };
    vec![
        ReferenceFamily { label: "GRW".into(), central: point("GRW", 1e-16), band: None },
        ReferenceFamily {
            label: "Adler".into(),
            central: point("Adler", 1e-8),
            band: Some((point("Adler (low)", 1e-10), point("Adler (high)", 1e-6))),
        },
    ]
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    require_positive("grid minimum", lo)?;
    require_positive("grid maximum", hi)?;
    match n {
        0 => Err(Error::domain("grid needs at least one point")),
        1 => Ok(vec![lo]),
        _ if hi <= lo => Err(Error::domain(format!("grid range [{lo}, {hi}] is not increasing"))),
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let step = (b - a) / (n - 1) as f64;
            Ok((0..n)
                .map(|i| match i {
                    0 => lo,
                    i if i == n - 1 => hi,
                    i => (a + step * i as f64).exp(),
                })
                .collect())
        }
    }
}

pub fn default_grid() -> Vec<f64> {
    log_grid(DEFAULT_GRID_MIN, DEFAULT_GRID_MAX, DEFAULT_GRID_POINTS).expect("default grid is valid")
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain("r_c grid is empty"));
    }
    for &r in grid {
        require_positive("r_c grid value", r)?;
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("r_c grid must be strictly increasing"));
    }
    Ok(())
}

/// Transports a limit obtained at `r_ref` across the grid.
pub fn scan(
    lambda_ref: f64,
    r_ref: f64,
    grid: &[f64],
    coupling: CouplingMode,
    method: Method,
    confidence: f64,
) -> Result<ExclusionCurve> {
    require_positive("lambda_ref", lambda_ref)?;
    require_positive("r_ref", r_ref)?;
    require_open_unit("confidence", confidence)?;
    validate_grid(grid)?;
    let points = grid
        .iter()
        .map(|&r_c| {
            let ratio = r_c / r_ref;
            CurvePoint { r_c, lambda_limit: lambda_ref * (ratio * ratio) }
        })
        .collect();
    Ok(ExclusionCurve { coupling, points, method, confidence })
}

impl ExclusionCurve {
    /// Whether `(r_c, lambda)` lies in the excluded region. Between grid
    /// points the curve is interpolated in log-log.
    pub fn excludes(&self, r_c: f64, lambda: f64) -> bool {
        let pts = &self.points;
        let (Some(first), Some(last)) = (pts.first(), pts.last()) else {
            return false;
        };
        if r_c < first.r_c || r_c > last.r_c {
            return false;
        }
        let idx = pts.partition_point(|p| p.r_c < r_c);
        let limit = if idx == 0 {
            first.lambda_limit
        } else {
            let (a, b) = (&pts[idx - 1], &pts[idx.min(pts.len() - 1)]);
            if b.r_c == a.r_c {
                a.lambda_limit
            } else {
                let t = (r_c.ln() - a.r_c.ln()) / (b.r_c.ln() - a.r_c.ln());
                (a.lambda_limit.ln() + t * (b.lambda_limit.ln() - a.lambda_limit.ln())).exp()
            }
        };
        lambda > limit
    }
}

pub fn write_curves<W: Write>(curves: &[ExclusionCurve], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CURVE_CSV_HEADER}")?;
    for curve in curves {
        for p in &curve.points {
            writeln!(
                out,
                "{:?},{:?},{},{},{:?}",
                p.r_c, p.lambda_limit, curve.coupling, curve.method, curve.confidence
            )?;
        }
    }
    Ok(())
}

pub fn curves_to_csv_string(curves: &[ExclusionCurve]) -> String {
    let mut buf = Vec::new();
    write_curves(curves, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

#[derive(Deserialize)]
struct CurveRow {
    r_c_m: f64,
    lambda_limit_s_inv: f64,
    coupling: CouplingMode,
    method: Method,
    confidence: f64,
}

/// Reads curve CSV back, grouping consecutive rows by (coupling, method, confidence).
pub fn read_curves<R: Read>(reader: R) -> Result<Vec<ExclusionCurve>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    check_header(&mut rdr, CURVE_CSV_HEADER)?;
    let mut curves: Vec<ExclusionCurve> = Vec::new();
    for row in rdr.deserialize::<CurveRow>() {
        let row = row.map_err(csv_error)?;
        let point = CurvePoint { r_c: row.r_c_m, lambda_limit: row.lambda_limit_s_inv };
        match curves.last_mut() {
            Some(c) if c.coupling == row.coupling && c.method == row.method && c.confidence == row.confidence => {
                c.points.push(point)
            }
            _ => curves.push(ExclusionCurve {
                coupling: row.coupling,
                points: vec![point],
                method: row.method,
                confidence: row.confidence,
            }),
        }
    }
    for c in &curves {
        let grid: Vec<f64> = c.points.iter().map(|p| p.r_c).collect();
        validate_grid(&grid).map_err(|e| Error::Validation(e.to_string()))?;
        if c.points.iter().any(|p| !(p.lambda_limit > 0.0)) {
            return Err(Error::Validation("curve limits must be > 0".into()));
        }
    }
    Ok(curves)
}

/// Reads a user-supplied boundary polyline (`r_c_m,lambda_s_inv`). An empty
/// file yields an empty overlay.
pub fn load_overlay_boundary(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_overlay(&text)
}

pub fn parse_overlay(text: &str) -> Result<Vec<(f64, f64)>> {
    if text.lines().all(|l| l.trim().is_empty() || l.trim_start().starts_with('#')) {
        return Ok(Vec::new());
    }
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    check_header(&mut rdr, OVERLAY_CSV_HEADER)?;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for row in rdr.deserialize::<(f64, f64)>() {
        let (r, l) = row.map_err(csv_error)?;
        if !(r > 0.0 && l > 0.0 && r.is_finite() && l.is_finite()) {
            return Err(Error::Validation(format!("overlay point ({r}, {l}) must be positive")));
        }
        if let Some(&(prev, _)) = points.last() {
            if r <= prev {
                return Err(Error::Validation(format!(
                    "overlay r_c values must be strictly increasing ({prev} then {r})"
                )));
            }
        }
        points.push((r, l));
    }
    Ok(points)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &str) -> Result<()> {
    let headers = rdr.headers().map_err(csv_error)?;
    let found = headers.iter().collect::<Vec<_>>().join(",");
    if found != expected {
        return Err(Error::Parse { line: 1, message: format!("expected header '{expected}', found '{found}'") });
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { line, message: e.to_string() }
}
