//! Batch front-end: one function per subcommand, each turning a
//! [`RunConfig`] into a serializable report plus optional CSV output.
//!
//! Reports never contain timings or paths that change between runs, so the
//! same configuration and seed give byte-identical output.

pub mod config;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

pub use config::{Cli, Command, CommonArgs, RunConfig};

use crate::functionals::{compute_b, compute_h, compute_v1, compute_v2, compute_v3};
use crate::functionals::{FunctionalBreakdown, FunctionalError, FunctionalParams};
use crate::optimize::{assemble, certify, min_h_grid, CertificationResult, OptimizeError};
use crate::oracle::{self, OracleError};
use crate::zeros::{self, format_17, GapSummary, GapVariant, ZeroError, ZeroSource, ZeroTable};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("degenerate mollifier (U = {0:e})")]
    ZeroMollifier(f64),
    #[error(transparent)]
    Bracket(OptimizeError),
    #[error("{0} oracle check(s) exceeded tolerance")]
    OracleFailed(usize),
    #[error(transparent)]
    Zeros(#[from] ZeroError),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    /// 1 runtime or oracle failure, 2 configuration or input error,
    /// 3 degenerate mollifier, 4 bracket does not straddle `h_min = 1`.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Zeros(_) => 2,
            Self::ZeroMollifier(_) => 3,
            Self::Bracket(_) => 4,
            Self::OracleFailed(_) | Self::Runtime(_) => 1,
        }
    }
}

impl From<FunctionalError> for CliError {
    fn from(e: FunctionalError) -> Self {
        match e {
            FunctionalError::ZeroMollifier { u } => Self::ZeroMollifier(u),
            FunctionalError::InvalidParams(_) | FunctionalError::ThetaUnsupported(_) => {
                Self::Config(e.to_string())
            }
            other => Self::Runtime(other.to_string()),
        }
    }
}

impl From<OptimizeError> for CliError {
    fn from(e: OptimizeError) -> Self {
        match e {
            OptimizeError::Bracket { .. } => Self::Bracket(e),
            OptimizeError::InvalidArgument(m) => Self::Config(m),
            OptimizeError::Functional(f) => f.into(),
            other => Self::Runtime(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::InvalidArgument(m) => Self::Config(m),
            OracleError::ThetaUnsupported(_) => Self::Config(e.to_string()),
            OracleError::Functional(f) => f.into(),
            other => Self::Runtime(other.to_string()),
        }
    }
}

/// A finished command: the JSON document plus any CSV files, by name.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub name: &'static str,
    pub json: String,
    pub csv: Vec<(&'static str, String)>,
}

impl Output {
    fn new<T: Serialize>(name: &'static str, report: &T, csv: Vec<(&'static str, String)>) -> Self {
        let mut json = serde_json::to_string_pretty(report).expect("reports contain only finite numbers");
        json.push('\n');
        Self { name, json, csv }
    }

    /// Writes `<dir>/<name>.json` and the CSV files.
    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        let io = |p: &Path, e: std::io::Error| CliError::Runtime(format!("cannot write {}: {e}", p.display()));
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let path = dir.join(format!("{}.json", self.name));
        fs::write(&path, &self.json).map_err(|e| io(&path, e))?;
        for (file, body) in &self.csv {
            let path = dir.join(file);
            fs::write(&path, body).map_err(|e| io(&path, e))?;
        }
        Ok(())
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let cfg = RunConfig::new(cli.command.args().clone())?;
    let out = match &cli.command {
        Command::HEval(_) => cmd_h_eval(&cfg)?,
        Command::Certify(_) => cmd_certify(&cfg)?,
        Command::Oracle(_) => {
            let (output, failures) = cmd_oracle(&cfg)?;
            if let Some(dir) = cfg.out() {
                output.write_to(&dir)?;
            }
            if failures > 0 {
                print!("{}", output.json);
                return Err(CliError::OracleFailed(failures));
            }
            return Ok(output);
        }
        Command::Zeros(_) => cmd_zeros(&cfg)?,
    };
    if let Some(dir) = cfg.out() {
        out.write_to(&dir)?;
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct HEvalReport {
    pub command: &'static str,
    pub preset: Option<String>,
    pub params: FunctionalParams,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub breakdown: FunctionalBreakdown,
}

pub fn cmd_h_eval(cfg: &RunConfig) -> Result<Output, CliError> {
    let (preset, r, p1, p2) = cfg.polynomials()?;
    let params = cfg.params(r, config::DEFAULT_C)?;
    let breakdown = compute_h(&p1, &p2, &params)?;
    let report = HEvalReport {
        command: "h-eval",
        preset,
        params,
        p1: p1.coeffs().to_vec(),
        p2: p2.coeffs().to_vec(),
        breakdown,
    };
    Ok(Output::new("h_eval", &report, Vec::new()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub c: f64,
    pub h_min: f64,
}

#[derive(Debug, Serialize)]
pub struct CertifyReport {
    pub command: &'static str,
    pub params: FunctionalParams,
    pub bracket: [f64; 2],
    pub tol_c: f64,
    pub result: CertificationResult,
    /// Smallest eigenvalue of the equilibrated denominator form at `c*`.
    pub denominator_min_eigenvalue: Option<f64>,
    pub grid: Vec<GridPoint>,
}

pub fn cmd_certify(cfg: &RunConfig) -> Result<Output, CliError> {
    let params = cfg.params(2, 0.0)?;
    let degree = cfg.degree()?;
    let (lo, hi, tol) = cfg.bracket()?;
    let result = certify(&params, degree, lo, hi, tol)?;
    let forms = assemble(&params.with_c(result.c_star), degree)?;
    let grid: Vec<GridPoint> = min_h_grid(&params, degree, &cfg.c_grid(lo, hi)?)?
        .into_iter()
        .map(|(c, h_min)| GridPoint { c, h_min })
        .collect();
    let mut csv = String::from("c,h_min\n");
    for g in &grid {
        csv.push_str(&format!("{},{}\n", format_17(g.c), format_17(g.h_min)));
    }
    let report = CertifyReport {
        command: "certify",
        params: params.with_c(result.c_star),
        bracket: [lo, hi],
        tol_c: tol,
        denominator_min_eigenvalue: forms.denominator_min_eigenvalue(),
        result,
        grid,
    };
    Ok(Output::new("certify", &report, vec![("h_min_grid.csv", csv)]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: String,
    /// Largest relative deviation (or the check's own statistic).
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl OracleCheck {
    fn new(name: &str, deviation: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            deviation,
            tolerance,
            passed: deviation <= tolerance,
            detail,
        }
    }

    fn failed(name: &str, tolerance: f64, err: impl std::fmt::Display) -> Self {
        Self {
            name: name.into(),
            deviation: f64::MAX,
            tolerance,
            passed: false,
            detail: err.to_string(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub command: &'static str,
    pub suite: String,
    pub seed: u64,
    pub pairs: usize,
    pub checks: Vec<OracleCheck>,
    pub passed: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// Window oracles over seeded degree-3 pairs and `(r, c) ∈ {1, 2} × {π, 2π}`.
pub fn window_checks(seed: u64, pairs: usize) -> Vec<OracleCheck> {
    let sample = oracle::seeded_pairs(seed, pairs, 3);
    let mut dev = [0.0f64; 3];
    let mut err: [Option<String>; 3] = [None, None, None];
    for r in [1usize, 2] {
        for c in [PI, 2.0 * PI] {
            let params = FunctionalParams::default().with_r(r).with_c(c);
            for (p1, p2) in &sample {
                let pairs = [
                    (oracle::v1_by_eta_quadrature(p1, &params), compute_v1(p1, &params).map_err(OracleError::from)),
                    (oracle::v2_by_eta_quadrature(p1, p2, &params), compute_v2(p1, p2, &params).map_err(OracleError::from)),
                    (oracle::v3_by_eta_quadrature(p2, &params), compute_v3(p2, &params).map_err(OracleError::from)),
                ];
                for (k, (o, cf)) in pairs.into_iter().enumerate() {
                    match (o, cf) {
                        (Ok(o), Ok(cf)) => dev[k] = dev[k].max(rel(o, cf)),
                        (Err(e), _) | (_, Err(e)) => {
                            err[k].get_or_insert(format!("r={r}, c={c}: {e}"));
                        }
                    }
                }
            }
        }
    }
    let names = ["v1_window", "v2_window", "v3_window"];
    let tols = [1e-6, 1e-5, 1e-6];
    (0..3)
        .map(|k| match &err[k] {
            Some(e) => OracleCheck::failed(names[k], tols[k], e),
            None => OracleCheck::new(
                names[k],
                dev[k],
                tols[k],
                format!("{pairs} pairs x (r, c) in {{1, 2}} x {{pi, 2pi}}"),
            ),
        })
        .collect()
}

/// `B(r, 1/2, j; u)` closed form vs direct quadrature.
pub fn b_checks(seed: u64) -> Vec<OracleCheck> {
    let tol = 1e-10;
    let mut dev = 0.0f64;
    for (_, p2) in oracle::seeded_pairs(seed ^ 0xB, 3, 3) {
        for r in 1..=3 {
            for j in 0..=8 {
                let closed = match compute_b(r, 0.5, j, &p2) {
                    Ok(b) => b,
                    Err(e) => return vec![OracleCheck::failed("b_quadrature", tol, e)],
                };
                let scale = [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|&u| closed.eval(u).abs()).fold(0.0, f64::max);
                for &u in &[0.25, 0.5, 0.75, 1.0] {
                    match oracle::b_by_quadrature(r, 0.5, j, &p2, u) {
                        Ok(q) => dev = dev.max((q - closed.eval(u)).abs() / scale.max(f64::MIN_POSITIVE)),
                        Err(e) => return vec![OracleCheck::failed("b_quadrature", tol, e)],
                    }
                }
            }
        }
    }
    vec![OracleCheck::new("b_quadrature", dev, tol, "r in 1..=3, j in 0..=8, relative to max |B| on [0, 1]".into())]
}

/// Euler-product constants and the divisor-square-sum trend.
pub fn constant_checks() -> Vec<OracleCheck> {
    let mut out = Vec::new();
    match oracle::a_r_euler_product(1, 1_000_000) {
        Ok(a) => out.push(OracleCheck::new("a_1_exact", (a.value - 1.0).abs(), 0.0, format!("a_1 = {}", a.value))),
        Err(e) => out.push(OracleCheck::failed("a_1_exact", 0.0, e)),
    }
    let exact = 6.0 / (PI * PI);
    match oracle::a_r_euler_product(2, 1_000_000) {
        Ok(a) => out.push(OracleCheck::new(
            "a_2_six_over_pi_sq",
            (a.value - exact).abs(),
            1e-6,
            format!("a_2 = {}, tail estimate {:e}", a.value, a.tail_estimate),
        )),
        Err(e) => out.push(OracleCheck::failed("a_2_six_over_pi_sq", 1e-6, e)),
    }
    for r in [1usize, 2] {
        let name = format!("divisor_square_trend_r{r}");
        match oracle::divisor_square_trend(r, &[1_000, 1_000_000]) {
            Ok(v) => {
                let (early, late) = ((v[0] - 1.0).abs(), (v[1] - 1.0).abs());
                // strict decrease: the statistic is late/early and must be < 1
                let mut check = OracleCheck::new(
                    &name,
                    late / early,
                    1.0,
                    format!("ratio {} at y = 1e3, {} at y = 1e6", v[0], v[1]),
                );
                check.passed = late < early;
                out.push(check);
            }
            Err(e) => out.push(OracleCheck::failed(&name, 1.0, e)),
        }
    }
    out
}

/// Returns the output and the number of failed checks.
pub fn cmd_oracle(cfg: &RunConfig) -> Result<(Output, usize), CliError> {
    let suite = cfg.suite();
    let seed = cfg.seed();
    let pairs = cfg.pairs();
    let mut checks = Vec::new();
    let all = suite == "all";
    match suite.as_str() {
        "all" | "window" | "b" | "constants" => {}
        other => return Err(CliError::Config(format!("unknown oracle suite {other:?}"))),
    }
    if all || suite == "window" {
        checks.extend(window_checks(seed, pairs));
    }
    if all || suite == "b" {
        checks.extend(b_checks(seed));
    }
    if all || suite == "constants" {
        checks.extend(constant_checks());
    }
    let failures = checks.iter().filter(|c| !c.passed).count();
    let report = OracleReport {
        command: "oracle",
        suite,
        seed,
        pairs,
        passed: failures == 0,
        checks,
    };
    Ok((Output::new("oracle", &report, Vec::new()), failures))
}

#[derive(Debug, Serialize)]
pub struct ZerosReport {
    pub command: &'static str,
    pub count: usize,
    pub range: Option<(f64, f64)>,
    pub variant: GapVariant,
    pub first_gap: Option<zeros::GapRecord>,
    pub summary: GapSummary,
}

pub fn cmd_zeros(cfg: &RunConfig) -> Result<Output, CliError> {
    let path = cfg.zeros_file()?;
    let table = ZeroTable::load(&path, cfg.format()?)?;
    let variant = cfg.variant()?;
    let gaps = zeros::normalized_gaps(&table, variant);
    let summary = zeros::gap_stats(&gaps, &cfg.thresholds()?, cfg.histogram()?);
    let ZeroSource { count, range, .. } = table.source().clone();
    let report = ZerosReport {
        command: "zeros",
        count,
        range,
        variant,
        first_gap: gaps.first().copied(),
        summary,
    };
    Ok(Output::new("zeros", &report, vec![("gaps.csv", zeros::gaps_to_csv(&gaps))]))
}
