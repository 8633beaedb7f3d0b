//! Zero-table ingestion and normalized gap statistics.
//!
//! Ordinates are external data (e.g. Odlyzko's published tables); nothing
//! here computes zeros.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ZeroError {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: cannot parse {content:?} as an ordinate")]
    Parse { line: usize, content: String },
    #[error("ordinates not strictly increasing at index {index}: {value} after {previous}")]
    Monotonicity { index: usize, previous: f64, value: f64 },
    #[error("ordinate at index {index} is not positive: {value}")]
    NonPositive { index: usize, value: f64 },
    #[error("unknown {kind} {value:?}")]
    UnknownName { kind: &'static str, value: String },
}

/// On-disk layout of a zero table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroFormat {
    /// One decimal ordinate per line.
    #[default]
    Plain,
    /// First line a base value; each later line a delta added to the base.
    Offset,
}

impl FromStr for ZeroFormat {
    type Err = ZeroError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(Self::Plain),
            "offset" => Ok(Self::Offset),
            _ => Err(ZeroError::UnknownName { kind: "zero-file format", value: s.into() }),
        }
    }
}

/// Normalization of the gap between consecutive ordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapVariant {
    /// `(γ' − γ) log γ / 2π`, the displayed formula read literally.
    #[serde(rename = "paper_log_gamma")]
    LogGammaLiteral,
    /// `(γ' − γ) log(γ/2π) / 2π`, which has mean spacing 1.
    #[default]
    #[serde(rename = "log_gamma_over_2pi")]
    LogGammaOver2Pi,
}

impl GapVariant {
    pub fn name(self) -> &'static str {
        match self {
            Self::LogGammaLiteral => "paper_log_gamma",
            Self::LogGammaOver2Pi => "log_gamma_over_2pi",
        }
    }

    /// Normalized gap between `gamma` and `gamma_next`.
    pub fn delta(self, gamma: f64, gamma_next: f64) -> f64 {
        let two_pi = std::f64::consts::TAU;
        let density = match self {
            Self::LogGammaLiteral => gamma.ln(),
            Self::LogGammaOver2Pi => (gamma / two_pi).ln(),
        };
        (gamma_next - gamma) * density / two_pi
    }
}

impl fmt::Display for GapVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GapVariant {
    type Err = ZeroError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper_log_gamma" => Ok(Self::LogGammaLiteral),
            "log_gamma_over_2pi" => Ok(Self::LogGammaOver2Pi),
            _ => Err(ZeroError::UnknownName { kind: "gap variant", value: s.into() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSource {
    pub path: Option<PathBuf>,
    pub count: usize,
    /// `(first, last)` ordinate, if any.
    pub range: Option<(f64, f64)>,
}

/// Strictly increasing positive ordinates `γ` of zeros `1/2 + iγ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTable {
    ordinates: Vec<f64>,
    source: ZeroSource,
}

/// Formats `x` with 17 significant digits, positionally for ordinary
/// magnitudes and in scientific notation otherwise. Always round-trips.
pub fn format_17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // log10 can be off by one right at powers of ten
        if s.parse::<f64>().ok() == Some(x) {
            return s;
        }
    }
    format!("{x:.16e}")
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

impl ZeroTable {
    /// Validates and wraps a list of ordinates.
    pub fn from_ordinates(ordinates: Vec<f64>) -> Result<Self, ZeroError> {
        for (i, &g) in ordinates.iter().enumerate() {
            if !(g > 0.0) || !g.is_finite() {
                return Err(ZeroError::NonPositive { index: i, value: g });
            }
            if i > 0 && g <= ordinates[i - 1] {
                return Err(ZeroError::Monotonicity {
                    index: i,
                    previous: ordinates[i - 1],
                    value: g,
                });
            }
        }
        let source = ZeroSource {
            path: None,
            count: ordinates.len(),
            range: ordinates.first().map(|&a| (a, *ordinates.last().expect("non-empty"))),
        };
        Ok(Self { ordinates, source })
    }

    /// Parses file contents in the given format. Blank lines and anything
    /// after `#` are ignored; line numbers in errors are 1-based.
    pub fn parse(text: &str, format: ZeroFormat) -> Result<Self, ZeroError> {
        let mut values = Vec::new();
        let mut base: Option<f64> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let v: f64 = line
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| ZeroError::Parse { line: k + 1, content: raw.to_string() })?;
            match (format, base) {
                (ZeroFormat::Plain, _) => values.push(v),
                (ZeroFormat::Offset, None) => base = Some(v),
                (ZeroFormat::Offset, Some(b)) => values.push(b + v),
            }
        }
        Self::from_ordinates(values)
    }

    pub fn load(path: impl AsRef<Path>, format: ZeroFormat) -> Result<Self, ZeroError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ZeroError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut table = Self::parse(&text, format)?;
        table.source.path = Some(path.to_path_buf());
        Ok(table)
    }

    /// Plain-format text, one 17-significant-digit ordinate per line.
    pub fn to_plain_string(&self) -> String {
        let mut s = String::with_capacity(self.ordinates.len() * 22);
        for &g in &self.ordinates {
            s.push_str(&format_17(g));
            s.push('\n');
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ZeroError> {
        let path = path.as_ref();
        fs::write(path, self.to_plain_string()).map_err(|source| ZeroError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn source(&self) -> &ZeroSource {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }

    /// The sub-table of ordinates with indices in `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self::from_ordinates(self.ordinates[range].to_vec()).expect("sub-table of a valid table")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapRecord {
    pub gamma: f64,
    pub gamma_next: f64,
    pub delta: f64,
    pub variant: GapVariant,
}

impl GapRecord {
    pub fn new(gamma: f64, gamma_next: f64, variant: GapVariant) -> Self {
        Self { gamma, gamma_next, delta: variant.delta(gamma, gamma_next), variant }
    }
}

/// One record per consecutive pair; empty for tables with fewer than two
/// ordinates.
pub fn normalized_gaps(table: &ZeroTable, variant: GapVariant) -> Vec<GapRecord> {
    table
        .ordinates
        .windows(2)
        .map(|w| GapRecord::new(w[0], w[1], variant))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self { bins: 40, lo: 0.0, hi: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdCount {
    pub threshold: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSummary {
    pub variant: Option<GapVariant>,
    pub count: usize,
    pub max_delta: Option<f64>,
    pub max_at_gamma: Option<f64>,
    pub min_delta: Option<f64>,
    pub mean_delta: Option<f64>,
    pub exceeding: Vec<ThresholdCount>,
    pub histogram: Histogram,
    pub note: String,
}

/// Extremes, mean, threshold exceedances (strict `δ > t`) and a histogram on
/// `[lo, hi)`.
pub fn gap_stats(records: &[GapRecord], thresholds: &[f64], spec: HistogramSpec) -> GapSummary {
    let bins = spec.bins.max(1);
    let width = (spec.hi - spec.lo) / bins as f64;
    let mut hist = Histogram {
        lo: spec.lo,
        hi: spec.hi,
        counts: vec![0; bins],
        underflow: 0,
        overflow: 0,
    };
    let mut max: Option<(f64, f64)> = None;
    let mut min: Option<f64> = None;
    let mut sum = 0.0;
    for rec in records {
        let d = rec.delta;
        if max.map_or(true, |(m, _)| d > m) {
            max = Some((d, rec.gamma));
        }
        min = Some(min.map_or(d, |m| m.min(d)));
        sum += d;
        if d < spec.lo {
            hist.underflow += 1;
        } else if d >= spec.hi || !(width > 0.0) {
            hist.overflow += 1;
        } else {
            let k = (((d - spec.lo) / width) as usize).min(bins - 1);
            hist.counts[k] += 1;
        }
    }
    let exceeding = thresholds
        .iter()
        .map(|&t| ThresholdCount {
            threshold: t,
            count: records.iter().filter(|r| r.delta > t).count() as u64,
        })
        .collect();
    GapSummary {
        variant: records.first().map(|r| r.variant),
        count: records.len(),
        max_delta: max.map(|m| m.0),
        max_at_gamma: max.map(|m| m.1),
        min_delta: min,
        mean_delta: (!records.is_empty()).then(|| sum / records.len() as f64),
        exceeding,
        histogram: hist,
        note: "under log_gamma_over_2pi the mean normalized gap tends to 1 as the height grows; \
               at small heights it is noticeably below 1"
            .to_string(),
    }
}

/// `gamma,gamma_next,delta` CSV with 17-significant-digit fields.
pub fn gaps_to_csv(records: &[GapRecord]) -> String {
    let mut s = String::from("gamma,gamma_next,delta\n");
    for r in records {
        s.push_str(&format!(
            "{},{},{}\n",
            format_17(r.gamma),
            format_17(r.gamma_next),
            format_17(r.delta)
        ));
    }
    s
}
