//! Binned spectrum model, CSV I/O and range selection.
//!
//! File layout: a `center_keV,width_keV,counts` header followed by one row
//! per bin. Lines starting with `#` are comments.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "center_keV,width_keV,counts";

/// Relative slack used when comparing bin widths and edges.
const EDGE_TOL: f64 = 1e-9;

/// Default exposure in kg·day when none is supplied.
pub const DEFAULT_EXPOSURE_KG_DAY: f64 = 80.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBin {
    /// Bin center in keV.
    pub center: f64,
    /// Bin width in keV.
    pub width: f64,
    pub counts: u64,
}

impl EnergyBin {
    pub fn new(center: f64, width: f64, counts: u64) -> Result<Self> {
        let bin = EnergyBin { center, width, counts };
        bin.validate()?;
        Ok(bin)
    }

    fn validate(&self) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::Validation(format!("bin width must be > 0, got {}", self.width)));
        }
        if !(self.center.is_finite() && self.center - self.width / 2.0 > 0.0) {
            return Err(Error::Validation(format!(
                "bin at {} keV (width {}) extends to non-positive energy",
                self.center, self.width
            )));
        }
        Ok(())
    }

    pub fn lower_edge(&self) -> f64 {
        self.center - self.width / 2.0
    }

    pub fn upper_edge(&self) -> f64 {
        self.center + self.width / 2.0
    }
}

/// A uniformly binned, background-free counting spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedSpectrum {
    bins: Vec<EnergyBin>,
    pub exposure_kg_day: f64,
    pub source_label: String,
}

/// Energy window and per-bin count threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeSelection {
    pub e_min: f64,
    pub e_max: f64,
    pub min_counts: u64,
}

impl Default for RangeSelection {
    fn default() -> Self {
        RangeSelection { e_min: 14.5, e_max: 48.5, min_counts: 5 }
    }
}

impl RangeSelection {
    pub fn new(e_min: f64, e_max: f64, min_counts: u64) -> Result<Self> {
        if !(e_min.is_finite() && e_max.is_finite() && e_min < e_max) {
            return Err(Error::Validation(format!(
                "energy range requires e_min < e_max, got [{e_min}, {e_max}]"
            )));
        }
        Ok(RangeSelection { e_min, e_max, min_counts })
    }

    fn keeps(&self, bin: &EnergyBin) -> bool {
        bin.center >= self.e_min && bin.center <= self.e_max && bin.counts >= self.min_counts
    }
}

impl BinnedSpectrum {
    /// Builds a validated spectrum: sorted, non-overlapping, uniform widths.
    pub fn new(bins: Vec<EnergyBin>) -> Result<Self> {
        for bin in &bins {
            bin.validate()?;
        }
        for pair in bins.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if b.center <= a.center {
                return Err(Error::Validation(format!(
                    "bins must be sorted by strictly increasing center ({} then {})",
                    a.center, b.center
                )));
            }
            if (b.width - a.width).abs() > EDGE_TOL * a.width {
                return Err(Error::Validation(format!(
                    "non-uniform binning: widths {} and {}",
                    a.width, b.width
                )));
            }
            if b.lower_edge() < a.upper_edge() - EDGE_TOL * a.width {
                return Err(Error::Validation(format!(
                    "bins at {} and {} keV overlap",
                    a.center, b.center
                )));
            }
        }
        Ok(BinnedSpectrum {
            bins,
            exposure_kg_day: DEFAULT_EXPOSURE_KG_DAY,
            source_label: String::new(),
        })
    }

    /// Zero-count bins with centers `first, first + width, ..., last`.
    pub fn grid(first_center: f64, last_center: f64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) || !(last_center >= first_center) {
            return Err(Error::Validation(format!(
                "bin grid {first_center}:{last_center}:{width} is not increasing"
            )));
        }
        let steps = ((last_center - first_center) / width + EDGE_TOL).floor() as usize;
        let bins = (0..=steps)
            .map(|k| EnergyBin::new(first_center + k as f64 * width, width, 0))
            .collect::<Result<Vec<_>>>()?;
        Self::new(bins)
    }

    /// Zero-count bins tiling `[e_min, e_max]` with the given width.
    pub fn tiling(e_min: f64, e_max: f64, width: f64) -> Result<Self> {
        RangeSelection::new(e_min, e_max, 0)?;
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::Validation(format!("bin width must be > 0, got {width}")));
        }
        let n = ((e_max - e_min) / width * (1.0 + EDGE_TOL)).floor() as usize;
        if n == 0 {
            return Err(Error::Validation(format!(
                "range [{e_min}, {e_max}] is narrower than one {width} keV bin"
            )));
        }
        let bins = (0..n)
            .map(|k| EnergyBin::new(e_min + (k as f64 + 0.5) * width, width, 0))
            .collect::<Result<Vec<_>>>()?;
        Self::new(bins)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.source_label = label.into();
        self
    }

    pub fn with_exposure(mut self, exposure_kg_day: f64) -> Self {
        self.exposure_kg_day = exposure_kg_day;
        self
    }

    pub fn bins(&self) -> &[EnergyBin] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Replaces the counts, keeping the binning.
    pub fn with_counts(&self, counts: &[u64]) -> Result<Self> {
        if counts.len() != self.bins.len() {
            return Err(Error::Validation(format!(
                "{} counts supplied for {} bins",
                counts.len(),
                self.bins.len()
            )));
        }
        let mut out = self.clone();
        for (bin, &c) in out.bins.iter_mut().zip(counts) {
            bin.counts = c;
        }
        Ok(out)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .has_headers(true)
            .from_reader(reader);

        let headers = rdr.headers().map_err(csv_error)?.clone();
        let found: Vec<&str> = headers.iter().collect();
        if found != ["center_keV", "width_keV", "counts"] {
            return Err(Error::Parse {
                line: headers.position().map_or(1, |p| p.line() as usize),
                message: format!("expected header '{CSV_HEADER}', found '{}'", found.join(",")),
            });
        }

        let mut bins = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(csv_error)?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let field = |i: usize| record.get(i).unwrap_or_default();
            let center: f64 = parse_field(field(0), "center_keV", line)?;
            let width: f64 = parse_field(field(1), "width_keV", line)?;
            let counts: u64 = parse_field(field(2), "counts", line)?;
            bins.push(EnergyBin { center, width, counts });
        }
        Self::new(bins)
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for bin in &self.bins {
            writeln!(out, "{:?},{:?},{}", bin.center, bin.width, bin.counts)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

fn parse_field<T: std::str::FromStr>(raw: &str, name: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse().map_err(|e| Error::Parse {
        line,
        message: format!("bad {name} '{raw}': {e}"),
    })
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { line, message: e.to_string() }
}

/// Reads and validates a spectrum CSV file.
pub fn load_spectrum(path: impl AsRef<Path>) -> Result<BinnedSpectrum> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BinnedSpectrum::from_reader(file)?.with_label(path.display().to_string()))
}

/// Keeps the bins whose center lies in `[e_min, e_max]` and whose counts
/// reach `min_counts`, in their original order.
pub fn select(spectrum: &BinnedSpectrum, sel: &RangeSelection) -> Result<BinnedSpectrum> {
    RangeSelection::new(sel.e_min, sel.e_max, sel.min_counts)?;
    let bins: Vec<EnergyBin> = spectrum.bins.iter().filter(|b| sel.keeps(b)).copied().collect();
    if bins.is_empty() {
        return Err(Error::SelectionEmpty {
            e_min: sel.e_min,
            e_max: sel.e_max,
            min_counts: sel.min_counts,
        });
    }
    Ok(BinnedSpectrum { bins, ..spectrum.clone() })
}

pub fn total_counts(spectrum: &BinnedSpectrum) -> u64 {
    spectrum.bins.iter().map(|b| b.counts).sum()
}
