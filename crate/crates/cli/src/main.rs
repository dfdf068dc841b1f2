mod config;
mod output;
mod verify;

use std::process::ExitCode;

use clap::Parser;
use rayon::prelude::*;

use ztselect::closedform::ClosedForm;
use ztselect::ergopt::{compare_v_to_h, solve_v, verify_calibration};
use ztselect::gibbs::SelectionRecord;
use ztselect::Params;

use config::{Cli, Command, RunConfig, DEFAULT_COMPARE_BETAS};
use output::{emit, render, ring_values, SubactionRow, SweepRow, Table};

const EIG_RINGS: u32 = 5;

enum Failure {
    Args(String),
    Numeric(String),
}

impl From<ztselect::Error> for Failure {
    fn from(e: ztselect::Error) -> Self {
        use ztselect::Error::*;
        match e {
            InvalidParams(_)
            | InvalidArgument(_)
            | EmptyWord
            | WordTooLong { .. }
            | TailRing(_)
            | DepthTooSmall(_) => Failure::Args(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Args(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Eig(a) => {
            let cfg = RunConfig::new("eig", vec![a.alpha], vec![a.beta], &a.common)
                .map_err(Failure::Args)?;
            let p = Params::new(a.alpha, cfg.gamma_slope, a.beta)?;
            let row = row_at(&p, &cfg)?;
            let cf = ClosedForm::solve(&p, cfg.tol)?;
            let rings = ring_values(&cf, EIG_RINGS)?;
            write(&cfg, Table::Sweep(&[row]), &[], Some(&rings))?;
            Ok(0)
        }
        Command::Sweep(a) => {
            let cfg = RunConfig::new(
                "sweep",
                a.alpha_grid.unwrap_or_else(config::default_alphas),
                a.beta_grid.unwrap_or_else(config::default_betas),
                &a.common,
            )
            .map_err(Failure::Args)?;
            let points: Vec<(f64, f64)> = cfg
                .alpha_grid
                .iter()
                .flat_map(|&al| cfg.beta_grid.iter().map(move |&b| (al, b)))
                .collect();
            let rows = in_pool(&cfg, || {
                points
                    .par_iter()
                    .map(|&(al, b)| row_at(&Params::new(al, cfg.gamma_slope, b)?, &cfg))
                    .collect::<Result<Vec<_>, Failure>>()
            })??;
            write(&cfg, Table::Sweep(&rows), &[], None)?;
            Ok(0)
        }
        Command::Verify(a) => {
            let cfg = RunConfig::new(
                "verify",
                a.alpha_grid.unwrap_or_else(config::default_alphas),
                vec![0.0],
                &a.common,
            )
            .map_err(Failure::Args)?;
            if !a.inject_perturbation.is_finite() {
                return Err(Failure::Args("perturbation must be finite".into()));
            }
            let suite = verify::Suite {
                alphas: &cfg.alpha_grid,
                gamma_slope: cfg.gamma_slope,
                tol: cfg.tol,
                depth: cfg.depth,
                perturbation: a.inject_perturbation,
            };
            let checks = suite.run()?;
            write(&cfg, Table::Checks, &checks, None)?;
            for c in &checks {
                eprintln!("{:<24} {}", c.name, if c.pass { "pass" } else { "FAIL" });
            }
            Ok(if checks.iter().all(|c| c.pass) { 0 } else { 2 })
        }
        Command::Subaction(a) => {
            let cfg = RunConfig::new(
                "subaction",
                a.alpha_grid.unwrap_or_else(config::default_alphas),
                a.beta_grid
                    .unwrap_or_else(|| DEFAULT_COMPARE_BETAS.to_vec()),
                &a.common,
            )
            .map_err(Failure::Args)?;
            if cfg.beta_grid[0] <= 0.0 {
                return Err(Failure::Args("comparison betas must be positive".into()));
            }
            let mut rows = Vec::new();
            for &alpha in &cfg.alpha_grid {
                let sol = solve_v(alpha, cfg.gamma_slope)?;
                let p = Params::new(alpha, cfg.gamma_slope, 1.0)?;
                let calibration_error = verify_calibration(&sol.subaction(), &p, 20)?;
                let cmp = compare_v_to_h(&p, &cfg.beta_grid)?;
                for r in &cmp.rows {
                    rows.push(SubactionRow {
                        alpha,
                        gamma_slope: cfg.gamma_slope,
                        delta_v: sol.delta_v,
                        gamma: sol.gamma,
                        certified: sol.certified,
                        calibration_error,
                        beta: r.beta,
                        sup_distance: r.sup_distance,
                        delta_v_estimate: r.delta_v_estimate,
                        decreasing: cmp.decreasing,
                    });
                }
            }
            write(&cfg, Table::Subaction(&rows), &[], None)?;
            Ok(0)
        }
    }
}

fn row_at(p: &Params, cfg: &RunConfig) -> Result<SweepRow, Failure> {
    let rec = SelectionRecord::compute_with(p, cfg.depth, cfg.tol)?;
    Ok(SweepRow::from(&rec))
}

fn in_pool<T: Send>(cfg: &RunConfig, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.thread_cap {
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| Failure::Numeric(e.to_string()))?;
    Ok(pool.install(f))
}

fn write(
    cfg: &RunConfig,
    table: Table<'_>,
    checks: &[output::Check],
    rings: Option<&[output::RingValue]>,
) -> Result<(), Failure> {
    let bytes = render(cfg, table, checks, rings).map_err(Failure::Numeric)?;
    emit(cfg, &bytes).map_err(|e| Failure::Args(format!("cannot write output: {e}")))
}
