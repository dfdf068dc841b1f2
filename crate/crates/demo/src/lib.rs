//! Browser bindings: a selection curve over β, the ring profile of `H`, `ν`
//! and `μ` at one point, and a one-point summary. Every export returns JSON.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use ztselect::closedform::{nu_ratio_star, Limit};
use ztselect::gibbs::{gibbs_masses_from, selection_ratio, SelectionRecord, SOLVE_TOL};
use ztselect::xferop::default_depth;
use ztselect::{closedform::ClosedForm, Params, Ring};

pub const MAX_STEPS: usize = 400;
pub const MAX_RINGS: u32 = 40;

#[derive(Debug, Serialize)]
pub struct CurvePoint {
    pub beta: f64,
    pub log_mu_ratio: f64,
    pub log_p_over_beta: f64,
    pub log_x_ratio: f64,
    pub log_nu_star_ratio: f64,
}

#[derive(Debug, Serialize)]
pub struct Curve {
    pub alpha: f64,
    pub gamma_slope: f64,
    /// `ln` of the finite limit of `μ[0]/μ[1]`, if there is one.
    pub log_target: Option<f64>,
    /// Growth rate of `(1/β) ln μ[0]/μ[1]` when the ratio diverges.
    pub target_rate: Option<f64>,
    pub points: Vec<CurvePoint>,
}

/// `steps + 1` evenly spaced β in `[0, beta_max]`.
pub fn curve(alpha: f64, gamma_slope: f64, beta_max: f64, steps: usize) -> ztselect::Result<Curve> {
    if steps == 0 || steps > MAX_STEPS {
        return Err(ztselect::Error::InvalidArgument(format!(
            "steps must be in 1..={MAX_STEPS}"
        )));
    }
    Params::new(alpha, gamma_slope, beta_max)?;
    let mut points = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let beta = beta_max * i as f64 / steps as f64;
        let p = Params::new(alpha, gamma_slope, beta)?;
        let cf = ClosedForm::solve(&p, SOLVE_TOL)?;
        let g = gibbs_masses_from(&cf, default_depth(&p))?;
        points.push(CurvePoint {
            beta,
            log_mu_ratio: selection_ratio(&g).ln_abs(),
            log_p_over_beta: if beta > 0.0 {
                cf.pressure.ln() / beta
            } else {
                f64::NAN
            },
            log_x_ratio: cf.x().ln_abs(),
            log_nu_star_ratio: nu_ratio_star(cf.pressure, &p)?.ln_abs(),
        });
    }
    let targets = ztselect::closedform::limit_targets(alpha)?;
    let (log_target, target_rate) = match targets.mu_ratio {
        Limit::Finite { value } if gamma_slope == 3.0 => (Some(value.ln()), None),
        Limit::Infinite { rate } if gamma_slope == 3.0 => (None, Some(rate)),
        _ => (None, None),
    };
    Ok(Curve {
        alpha,
        gamma_slope,
        log_target,
        target_rate,
        points,
    })
}

#[derive(Debug, Serialize)]
pub struct RingRow {
    pub ring: String,
    pub log_h: f64,
    pub log_nu: f64,
    pub log_mu: f64,
}

/// Rings `[2]`, `0ⁿ∗₀`, `1ⁿ∗₁` for `n ≤ n_max`, logs of `H`, `ν` and `μ`.
pub fn ring_profile(
    alpha: f64,
    gamma_slope: f64,
    beta: f64,
    n_max: u32,
) -> ztselect::Result<Vec<RingRow>> {
    if n_max == 0 || n_max > MAX_RINGS {
        return Err(ztselect::Error::InvalidArgument(format!(
            "n_max must be in 1..={MAX_RINGS}"
        )));
    }
    let p = Params::new(alpha, gamma_slope, beta)?;
    let cf = ClosedForm::solve(&p, SOLVE_TOL)?;
    let depth = default_depth(&p).max(n_max as usize + 1);
    let g = gibbs_masses_from(&cf, depth)?;
    let mut rings = vec![Ring::TwoHead];
    for n in 1..=n_max {
        rings.push(Ring::ZeroRun(n));
        rings.push(Ring::OneRun(n));
    }
    rings
        .into_iter()
        .map(|r| {
            Ok(RingRow {
                ring: r.to_string(),
                log_h: cf.h_ring(r)?.ln_abs(),
                log_nu: cf.nu_ring(r)?.ln_abs(),
                log_mu: g.masses.get(r).expect("ring within depth").ln_abs(),
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub pressure: f64,
    pub log_p_over_beta: f64,
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub log_mu_ratio: f64,
    pub residual_h: f64,
    pub residual_nu: f64,
    pub certified: bool,
}

pub fn summary(alpha: f64, gamma_slope: f64, beta: f64) -> ztselect::Result<Summary> {
    let r = SelectionRecord::compute(&Params::new(alpha, gamma_slope, beta)?, None)?;
    Ok(Summary {
        pressure: r.pressure,
        log_p_over_beta: r.log_p_over_beta,
        mu0: r.mu0.to_f64(),
        mu1: r.mu1.to_f64(),
        mu2: r.mu2.to_f64(),
        log_mu_ratio: r.mu_ratio.ln_abs(),
        residual_h: r.residual_h,
        residual_nu: r.residual_nu,
        certified: r.certified,
    })
}

fn to_json<T: Serialize>(v: ztselect::Result<T>) -> Result<String, JsValue> {
    let v = v.map_err(|e| JsValue::from_str(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = selectionCurve)]
pub fn selection_curve_js(
    alpha: f64,
    gamma_slope: f64,
    beta_max: f64,
    steps: usize,
) -> Result<String, JsValue> {
    to_json(curve(alpha, gamma_slope, beta_max, steps))
}

#[wasm_bindgen(js_name = ringProfile)]
pub fn ring_profile_js(
    alpha: f64,
    gamma_slope: f64,
    beta: f64,
    n_max: u32,
) -> Result<String, JsValue> {
    to_json(ring_profile(alpha, gamma_slope, beta, n_max))
}

#[wasm_bindgen(js_name = pointSummary)]
pub fn point_summary_js(alpha: f64, gamma_slope: f64, beta: f64) -> Result<String, JsValue> {
    to_json(summary(alpha, gamma_slope, beta))
}
