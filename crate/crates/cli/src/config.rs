use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ztselect::gibbs::{DEFAULT_ALPHA_GRID, DEFAULT_BETA_GRID};
use ztselect::Params;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_TOL: f64 = 1e-4;
pub const DEFAULT_COMPARE_BETAS: [f64; 4] = [10.0, 20.0, 40.0, 80.0];
pub const THREADS_ENV: &str = "ZTSELECT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "ztselect",
    version,
    about = "Zero-temperature selection for a two-slope potential on the 3-shift"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pressure, eigenfunction and eigenmeasure at one point
    Eig(EigArgs),
    /// One row per (alpha, beta) grid point
    Sweep(SweepArgs),
    /// Named-check suite; exit 0 only if every check passes
    Verify(VerifyArgs),
    /// Limit subaction, calibration and its comparison with (1/beta) log H
    Subaction(SubactionArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Slope of the potential near 1^inf (must exceed 1)
    #[arg(long, default_value_t = 3.0)]
    pub gamma_slope: f64,
    /// Truncation depth; automatic when omitted
    #[arg(long)]
    pub depth: Option<usize>,
    /// Relative tolerance of the pressure solve
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct EigArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 10.0)]
    pub beta: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated, strictly increasing
    #[arg(long, value_delimiter = ',')]
    pub alpha_grid: Option<Vec<f64>>,
    /// Comma-separated, strictly increasing
    #[arg(long, value_delimiter = ',')]
    pub beta_grid: Option<Vec<f64>>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_delimiter = ',')]
    pub alpha_grid: Option<Vec<f64>>,
    #[command(flatten)]
    pub common: Common,
    /// Relative shift applied to every pressure before checking (test hook)
    #[arg(long, hide = true, default_value_t = 0.0)]
    pub inject_perturbation: f64,
}

#[derive(Debug, Args)]
pub struct SubactionArgs {
    #[arg(long, value_delimiter = ',')]
    pub alpha_grid: Option<Vec<f64>>,
    /// Betas for the comparison table
    #[arg(long, value_delimiter = ',')]
    pub beta_grid: Option<Vec<f64>>,
    #[command(flatten)]
    pub common: Common,
}

/// Validated run configuration, echoed into JSON output.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub alpha_grid: Vec<f64>,
    pub gamma_slope: f64,
    pub beta_grid: Vec<f64>,
    pub depth: Option<usize>,
    pub tol: f64,
    pub output_format: Format,
    pub output_path: Option<String>,
    pub thread_cap: Option<usize>,
}

impl RunConfig {
    pub fn new(
        command: &'static str,
        alpha_grid: Vec<f64>,
        beta_grid: Vec<f64>,
        common: &Common,
    ) -> Result<Self, String> {
        check_grid("alpha", &alpha_grid)?;
        check_grid("beta", &beta_grid)?;
        if !(common.tol > 0.0 && common.tol <= MAX_TOL) {
            return Err(format!(
                "tol must lie in (0, {MAX_TOL:e}], got {}",
                common.tol
            ));
        }
        for &a in &alpha_grid {
            for &b in &beta_grid {
                Params::new(a, common.gamma_slope, b).map_err(|e| e.to_string())?;
            }
        }
        if let Some(d) = common.depth {
            ztselect::xferop::Layout::new(d).map_err(|e| e.to_string())?;
        }
        Ok(RunConfig {
            command,
            alpha_grid,
            gamma_slope: common.gamma_slope,
            beta_grid,
            depth: common.depth,
            tol: common.tol,
            output_format: common.format,
            output_path: common.output.as_ref().map(|p| p.display().to_string()),
            thread_cap: thread_cap()?,
        })
    }
}

pub fn default_alphas() -> Vec<f64> {
    DEFAULT_ALPHA_GRID.to_vec()
}

pub fn default_betas() -> Vec<f64> {
    DEFAULT_BETA_GRID.to_vec()
}

fn check_grid(name: &str, grid: &[f64]) -> Result<(), String> {
    if grid.is_empty() {
        return Err(format!("{name} grid is empty"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(format!("{name} grid has a non-finite value"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(format!("{name} grid must be strictly increasing"));
    }
    Ok(())
}

pub fn thread_cap() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!(
                "{THREADS_ENV} must be a positive integer, got {s:?}"
            )),
        },
    }
}
