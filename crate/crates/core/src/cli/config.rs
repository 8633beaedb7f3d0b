//! Command-line flags, JSON run manifests, and their merge into validated
//! per-command configurations. Flags override the file.

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::functionals::FunctionalParams;
use crate::kernels::Polynomial;
use crate::presets;
use crate::zeros::{GapVariant, HistogramSpec, ZeroFormat};

/// Default window for `h-eval`: the headline value `3.033π`.
pub const DEFAULT_C: f64 = 3.033 * PI;
pub const DEFAULT_DEGREE: usize = 10;
pub const DEFAULT_BRACKET: (f64, f64) = (3.0 * PI, 3.3 * PI);
pub const DEFAULT_TOL_C: f64 = 1e-3;
pub const DEFAULT_GRID_POINTS: usize = 20;
pub const DEFAULT_SEED: u64 = 20_090_101;
pub const DEFAULT_THRESHOLDS: [f64; 3] = [2.0, 2.5, 3.033];

#[derive(Debug, Parser)]
#[command(name = "zetagap", version, about = "Mollifier gap functional h(c) and certified bounds on large gaps between zeta zeros")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate h(c) for one polynomial pair and print the breakdown.
    HEval(CommonArgs),
    /// Bisect for the largest c with min h(c) < 1.
    Certify(CommonArgs),
    /// Cross-check the closed forms against independent oracles.
    Oracle(CommonArgs),
    /// Normalized gap statistics of a zero table.
    Zeros(CommonArgs),
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Self::HEval(a) | Self::Certify(a) | Self::Oracle(a) | Self::Zeros(a) => a,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::HEval(_) => "h-eval",
            Self::Certify(_) => "certify",
            Self::Oracle(_) => "oracle",
            Self::Zeros(_) => "zeros",
        }
    }
}

fn parse_list(flag: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Config(format!("--{flag}: cannot parse {t:?} as a number")))
        })
        .collect()
}

/// Flags shared by all subcommands; each only reads the ones it needs.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run manifest; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Moment order r (power of the divisor function in the mollifier).
    #[arg(long)]
    pub r: Option<usize>,
    /// Polynomial degree M.
    #[arg(long)]
    pub m: Option<usize>,
    /// Window parameter c of h(c).
    #[arg(long)]
    pub c: Option<f64>,
    /// Mollifier length exponent ϑ (window functionals require 1/2).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Comma-separated coefficients of P1, constant term first.
    #[arg(long, allow_hyphen_values = true)]
    pub p1: Option<String>,
    /// Comma-separated coefficients of P2, constant term first.
    #[arg(long, allow_hyphen_values = true)]
    pub p2: Option<String>,
    /// Named polynomial pair (default: the published r = 2, M = 10 pair).
    #[arg(long)]
    pub preset: Option<String>,
    /// Lower end of the certification bracket in c (h_min must be < 1 there).
    #[arg(long, allow_hyphen_values = true)]
    pub bracket_lo: Option<f64>,
    /// Upper end of the certification bracket in c (h_min must be >= 1 there).
    #[arg(long)]
    pub bracket_hi: Option<f64>,
    /// Bisection stops when the bracket in c is narrower than this.
    #[arg(long)]
    pub tol_c: Option<f64>,
    /// Maximum number of terms of the V3 series.
    #[arg(long)]
    pub j_max: Option<usize>,
    /// Gauss-Legendre order for the nested quadratures.
    #[arg(long)]
    pub quad_order: Option<usize>,
    /// Points of the h_min(c) plotting grid written by `certify`.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Table of zero ordinates for `zeros`.
    #[arg(long)]
    pub zeros_file: Option<PathBuf>,
    /// Zero-file format: plain | offset.
    #[arg(long)]
    pub format: Option<String>,
    /// Gap normalization: log_gamma_over_2pi | paper_log_gamma.
    #[arg(long)]
    pub variant: Option<String>,
    /// Comma-separated δ thresholds for `zeros`.
    #[arg(long)]
    pub thresholds: Option<String>,
    /// Number of histogram bins on [0, 4].
    #[arg(long)]
    pub bins: Option<usize>,
    /// Oracle suite: all | window | b | constants.
    #[arg(long)]
    pub suite: Option<String>,
    /// Number of random polynomial pairs for the window oracles.
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Output directory for the JSON report and CSV files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed of the random polynomial pairs used by `oracle`.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// The JSON manifest: same keys as the flags, with `-` replaced by `_`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub r: Option<usize>,
    pub m: Option<usize>,
    pub c: Option<f64>,
    pub c_grid: Option<Vec<f64>>,
    pub theta: Option<f64>,
    pub p1: Option<Vec<f64>>,
    pub p2: Option<Vec<f64>>,
    pub preset: Option<String>,
    pub bracket_lo: Option<f64>,
    pub bracket_hi: Option<f64>,
    pub tol_c: Option<f64>,
    pub j_max: Option<usize>,
    pub quad_order: Option<usize>,
    pub grid_points: Option<usize>,
    pub zeros_file: Option<PathBuf>,
    pub format: Option<String>,
    pub variant: Option<String>,
    pub thresholds: Option<Vec<f64>>,
    pub bins: Option<usize>,
    pub suite: Option<String>,
    pub pairs: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn load(path: &PathBuf) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Flags merged over the manifest.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub file: ConfigFile,
    pub args: CommonArgs,
}

/// A list flag, parsed, falling back to the manifest.
macro_rules! pick_list {
    ($self:ident, $field:ident) => {
        match &$self.args.$field {
            Some(s) => Some(parse_list(stringify!($field), s)?),
            None => $self.file.$field.clone(),
        }
    };
}

macro_rules! pick {
    ($self:ident, $field:ident) => {
        $self.args.$field.clone().or_else(|| $self.file.$field.clone())
    };
}

impl RunConfig {
    pub fn new(args: CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        Ok(Self { file, args })
    }

    pub fn out(&self) -> Option<PathBuf> {
        pick!(self, out)
    }

    pub fn seed(&self) -> u64 {
        pick!(self, seed).unwrap_or(DEFAULT_SEED)
    }

    /// Functional parameters; `c` defaults to `default_c`.
    pub fn params(&self, default_r: usize, default_c: f64) -> Result<FunctionalParams, CliError> {
        let base = FunctionalParams::default();
        let p = FunctionalParams {
            r: pick!(self, r).unwrap_or(default_r),
            theta: pick!(self, theta).unwrap_or(base.theta),
            c: pick!(self, c).unwrap_or(default_c),
            j_max: pick!(self, j_max).unwrap_or(base.j_max),
            quad_order: pick!(self, quad_order).unwrap_or(base.quad_order),
            tail_tol: base.tail_tol,
        };
        p.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(p)
    }

    /// `(preset name, r, P1, P2)`: explicit coefficients win, then a named
    /// preset, then the built-in pair (only for `r = 2`).
    pub fn polynomials(&self) -> Result<(Option<String>, usize, Polynomial, Polynomial), CliError> {
        let r_given = pick!(self, r);
        match (pick_list!(self, p1), pick_list!(self, p2)) {
            (Some(a), Some(b)) => {
                if a.is_empty() || b.is_empty() {
                    return Err(CliError::Config("empty coefficient list".into()));
                }
                Ok((None, r_given.unwrap_or(2), Polynomial::new(a), Polynomial::new(b)))
            }
            (Some(_), None) | (None, Some(_)) => {
                Err(CliError::Config("--p1 and --p2 must be given together".into()))
            }
            (None, None) => {
                let name = pick!(self, preset).unwrap_or_else(|| presets::PUBLISHED_R2_M10.to_string());
                let preset = presets::lookup(&name).ok_or_else(|| {
                    CliError::Config(format!("unknown preset {name:?}; known: {:?}", presets::names()))
                })?;
                if let Some(r) = r_given {
                    if r != preset.r {
                        return Err(CliError::Config(format!(
                            "preset {name} is for r = {}, got --r {r}; pass --p1/--p2",
                            preset.r
                        )));
                    }
                }
                Ok((Some(name), preset.r, preset.p1, preset.p2))
            }
        }
    }

    pub fn degree(&self) -> Result<usize, CliError> {
        let m = pick!(self, m).unwrap_or(DEFAULT_DEGREE);
        if m > 30 {
            return Err(CliError::Config(format!("degree M = {m} is too large (max 30)")));
        }
        Ok(m)
    }

    pub fn bracket(&self) -> Result<(f64, f64, f64), CliError> {
        let lo = pick!(self, bracket_lo).unwrap_or(DEFAULT_BRACKET.0);
        let hi = pick!(self, bracket_hi).unwrap_or(DEFAULT_BRACKET.1);
        let tol = pick!(self, tol_c).unwrap_or(DEFAULT_TOL_C);
        if !(lo >= 0.0 && lo < hi && hi.is_finite() && tol > 0.0) {
            return Err(CliError::Config(format!(
                "need 0 <= bracket_lo < bracket_hi and tol_c > 0, got [{lo}, {hi}], {tol}"
            )));
        }
        Ok((lo, hi, tol))
    }

    /// Plotting grid: the manifest's `c_grid`, else equally spaced points
    /// over the bracket.
    pub fn c_grid(&self, lo: f64, hi: f64) -> Result<Vec<f64>, CliError> {
        if let Some(g) = &self.file.c_grid {
            if g.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
                return Err(CliError::Config("c_grid entries must be finite and >= 0".into()));
            }
            return Ok(g.clone());
        }
        let n = pick!(self, grid_points).unwrap_or(DEFAULT_GRID_POINTS);
        Ok(match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
        })
    }

    pub fn zeros_file(&self) -> Result<PathBuf, CliError> {
        pick!(self, zeros_file).ok_or_else(|| CliError::Config("--zeros-file is required".into()))
    }

    pub fn format(&self) -> Result<ZeroFormat, CliError> {
        pick!(self, format)
            .map(|s| s.parse().map_err(|e: crate::zeros::ZeroError| CliError::Config(e.to_string())))
            .transpose()
            .map(Option::unwrap_or_default)
    }

    pub fn variant(&self) -> Result<GapVariant, CliError> {
        pick!(self, variant)
            .map(|s| s.parse().map_err(|e: crate::zeros::ZeroError| CliError::Config(e.to_string())))
            .transpose()
            .map(Option::unwrap_or_default)
    }

    pub fn thresholds(&self) -> Result<Vec<f64>, CliError> {
        Ok(pick_list!(self, thresholds).unwrap_or_else(|| DEFAULT_THRESHOLDS.to_vec()))
    }

    pub fn histogram(&self) -> Result<HistogramSpec, CliError> {
        let mut spec = HistogramSpec::default();
        if let Some(b) = pick!(self, bins) {
            if b == 0 {
                return Err(CliError::Config("bins must be >= 1".into()));
            }
            spec.bins = b;
        }
        Ok(spec)
    }

    pub fn suite(&self) -> String {
        pick!(self, suite).unwrap_or_else(|| "all".into())
    }

    pub fn pairs(&self) -> usize {
        pick!(self, pairs).unwrap_or(10)
    }
}
