use std::io::Write;

use serde::Serialize;

use ztselect::closedform::{ClosedForm, Limit};
use ztselect::gibbs::SelectionRecord;
use ztselect::Ring;

use crate::config::{Format, RunConfig};

pub const SWEEP_HEADER: [&str; 19] = [
    "alpha",
    "gamma_slope",
    "beta",
    "depth",
    "P",
    "log_P_over_beta",
    "P_e2beta",
    "x_ratio",
    "nu_cyl_ratio",
    "nu_star_ratio",
    "mu0",
    "mu1",
    "mu2",
    "mu_ratio",
    "target_mu_ratio",
    "target_gamma",
    "residual_H",
    "residual_nu",
    "certified",
];

/// 17 significant digits, dot decimal.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub gamma_slope: f64,
    pub beta: f64,
    pub depth: usize,
    #[serde(rename = "P")]
    pub pressure: f64,
    #[serde(rename = "log_P_over_beta")]
    pub log_p_over_beta: f64,
    #[serde(rename = "P_e2beta")]
    pub p_e2beta: f64,
    pub x_ratio: f64,
    pub nu_cyl_ratio: f64,
    pub nu_star_ratio: f64,
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu_ratio: f64,
    pub target_mu_ratio: f64,
    pub target_gamma: f64,
    #[serde(rename = "residual_H")]
    pub residual_h: f64,
    pub residual_nu: f64,
    pub certified: bool,
}

impl From<&SelectionRecord> for SweepRow {
    fn from(r: &SelectionRecord) -> Self {
        SweepRow {
            alpha: r.alpha,
            gamma_slope: r.gamma_slope,
            beta: r.beta,
            depth: r.depth,
            pressure: r.pressure,
            log_p_over_beta: r.log_p_over_beta,
            p_e2beta: r.p_e2beta.to_f64(),
            x_ratio: r.x_ratio.to_f64(),
            nu_cyl_ratio: r.nu_cyl_ratio.to_f64(),
            nu_star_ratio: r.nu_star_ratio.to_f64(),
            mu0: r.mu0.to_f64(),
            mu1: r.mu1.to_f64(),
            mu2: r.mu2.to_f64(),
            mu_ratio: r.mu_ratio.to_f64(),
            target_mu_ratio: match r.targets.mu_ratio {
                Limit::Finite { value } => value,
                Limit::Infinite { .. } => f64::INFINITY,
                Limit::NotApplicable => f64::NAN,
            },
            target_gamma: r.targets.gamma,
            residual_h: r.residual_h,
            residual_nu: r.residual_nu,
            certified: r.certified,
        }
    }
}

impl SweepRow {
    fn fields(&self) -> Vec<String> {
        let mut out = vec![
            fmt_f(self.alpha),
            fmt_f(self.gamma_slope),
            fmt_f(self.beta),
            self.depth.to_string(),
        ];
        out.extend(
            [
                self.pressure,
                self.log_p_over_beta,
                self.p_e2beta,
                self.x_ratio,
                self.nu_cyl_ratio,
                self.nu_star_ratio,
                self.mu0,
                self.mu1,
                self.mu2,
                self.mu_ratio,
                self.target_mu_ratio,
                self.target_gamma,
                self.residual_h,
                self.residual_nu,
            ]
            .map(fmt_f),
        );
        out.push(self.certified.to_string());
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RingValue {
    pub ring: String,
    #[serde(rename = "H")]
    pub h: f64,
    pub nu: f64,
}

pub fn ring_values(cf: &ClosedForm, n_max: u32) -> ztselect::Result<Vec<RingValue>> {
    let mut rings = vec![Ring::Fix0, Ring::Fix1, Ring::TwoHead];
    for n in 1..=n_max {
        rings.push(Ring::ZeroRun(n));
        rings.push(Ring::OneRun(n));
    }
    rings
        .into_iter()
        .map(|r| {
            Ok(RingValue {
                ring: r.to_string(),
                h: cf.h_ring(r)?.to_f64(),
                nu: cf.nu_ring(r)?.to_f64(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubactionRow {
    pub alpha: f64,
    pub gamma_slope: f64,
    pub delta_v: f64,
    pub gamma: f64,
    pub certified: bool,
    pub calibration_error: f64,
    pub beta: f64,
    pub sup_distance: f64,
    pub delta_v_estimate: f64,
    pub decreasing: bool,
}

pub const SUBACTION_HEADER: [&str; 10] = [
    "alpha",
    "gamma_slope",
    "delta_v",
    "gamma",
    "certified",
    "calibration_error",
    "beta",
    "sup_distance",
    "delta_v_estimate",
    "decreasing",
];

impl SubactionRow {
    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f(self.alpha),
            fmt_f(self.gamma_slope),
            fmt_f(self.delta_v),
            fmt_f(self.gamma),
            self.certified.to_string(),
            fmt_f(self.calibration_error),
            fmt_f(self.beta),
            fmt_f(self.sup_distance),
            fmt_f(self.delta_v_estimate),
            self.decreasing.to_string(),
        ]
    }
}

pub const CHECK_HEADER: [&str; 5] = ["name", "pass", "value", "tolerance", "detail"];

impl Check {
    fn fields(&self) -> Vec<String> {
        vec![
            self.name.clone(),
            self.pass.to_string(),
            fmt_f(self.value),
            fmt_f(self.tolerance),
            self.detail.clone(),
        ]
    }
}

/// Everything a command emits; CSV shows the table the command is about.
pub enum Table<'a> {
    Sweep(&'a [SweepRow]),
    Subaction(&'a [SubactionRow]),
    Checks,
}

#[derive(Serialize)]
struct JsonDoc<'a, R: Serialize> {
    config: &'a RunConfig,
    rows: &'a [R],
    checks: &'a [Check],
    #[serde(skip_serializing_if = "Option::is_none")]
    rings: Option<&'a [RingValue]>,
}

pub fn render(
    cfg: &RunConfig,
    table: Table<'_>,
    checks: &[Check],
    rings: Option<&[RingValue]>,
) -> Result<Vec<u8>, String> {
    match cfg.output_format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let err = |e: csv::Error| e.to_string();
            match table {
                Table::Sweep(rows) => {
                    w.write_record(SWEEP_HEADER).map_err(err)?;
                    for r in rows {
                        w.write_record(r.fields()).map_err(err)?;
                    }
                }
                Table::Subaction(rows) => {
                    w.write_record(SUBACTION_HEADER).map_err(err)?;
                    for r in rows {
                        w.write_record(r.fields()).map_err(err)?;
                    }
                }
                Table::Checks => {
                    w.write_record(CHECK_HEADER).map_err(err)?;
                    for c in checks {
                        w.write_record(c.fields()).map_err(err)?;
                    }
                }
            }
            w.into_inner().map_err(|e| e.to_string())
        }
        Format::Json => {
            let mut buf = match table {
                Table::Sweep(rows) => serde_json::to_vec_pretty(&JsonDoc {
                    config: cfg,
                    rows,
                    checks,
                    rings,
                }),
                Table::Subaction(rows) => serde_json::to_vec_pretty(&JsonDoc {
                    config: cfg,
                    rows,
                    checks,
                    rings,
                }),
                Table::Checks => serde_json::to_vec_pretty(&JsonDoc::<SweepRow> {
                    config: cfg,
                    rows: &[],
                    checks,
                    rings,
                }),
            }
            .map_err(|e| e.to_string())?;
            buf.push(b'\n');
            Ok(buf)
        }
    }
}

pub fn emit(cfg: &RunConfig, bytes: &[u8]) -> std::io::Result<()> {
    match &cfg.output_path {
        Some(path) => std::fs::write(path, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
    }
}
