//! Zero-temperature side: maximizing value, calibrated subactions, Peierls
//! barriers from the fixed points, and the limit `V = lim (1/β) log H`.

use serde::{Deserialize, Serialize};

use crate::closedform::ClosedForm;
use crate::error::{Error, Result};
use crate::ringspace::{dist_to_fixed, potential, preimage_rings, Params, Ring, Symbol, Word};

/// β at which uncertified slopes are estimated.
pub const ESTIMATE_BETA: f64 = 80.0;

/// Rings checked by the maximizing-value certificate.
pub const CERTIFICATE_DEPTH: u32 = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxCertificate {
    pub value: f64,
    /// Largest potential over every non-fixed ring up to the depth.
    pub max_off_fixed: f64,
    pub depth_checked: u32,
    pub maximizing: [Ring; 2],
}

/// `m(A) = 0`, certified by `A ≤ 0` on every ring and `A = 0` only at the
/// fixed points.
pub fn maximizing_value(p: &Params) -> Result<MaxCertificate> {
    p.validate()?;
    let mut max_off_fixed = potential(Ring::TwoHead, p)?;
    for n in 1..=CERTIFICATE_DEPTH {
        for r in [Ring::ZeroRun(n), Ring::OneRun(n)] {
            max_off_fixed = max_off_fixed.max(potential(r, p)?);
        }
    }
    let at_fixed = [potential(Ring::Fix0, p)?, potential(Ring::Fix1, p)?];
    if !(max_off_fixed < 0.0) || at_fixed != [0.0, 0.0] {
        return Err(Error::NonPositive("maximizing-value certificate"));
    }
    Ok(MaxCertificate {
        value: 0.0,
        max_off_fixed,
        depth_checked: CERTIFICATE_DEPTH,
        maximizing: [Ring::Fix0, Ring::Fix1],
    })
}

/// `u₀(w) = −d(w, 0^∞)`.
pub fn subaction_u0(w: &Word, _p: &Params) -> Result<f64> {
    Ok(-dist_to_fixed(w, Symbol::Zero)?.value)
}

/// `u₁(w) = −Γ d(w, 1^∞)`.
pub fn subaction_u1(w: &Word, p: &Params) -> Result<f64> {
    Ok(-p.gamma_slope * dist_to_fixed(w, Symbol::One)?.value)
}

/// `h(0^∞, w) = u₀(w)`, `h(1^∞, w) = u₁(w)`.
pub fn peierls_from_fixed(fixed: Ring, w: &Word, p: &Params) -> Result<f64> {
    match fixed {
        Ring::Fix0 => subaction_u0(w, p),
        Ring::Fix1 => subaction_u1(w, p),
        other => Err(Error::InvalidArgument(format!(
            "Peierls barrier only from the fixed points, got {other}"
        ))),
    }
}

/// `V(x) = max(c₀ − d(x,0^∞), c₁ − Γ d(x,1^∞))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subaction {
    pub c0: f64,
    pub c1: f64,
    pub gamma_slope: f64,
}

impl Subaction {
    pub fn u0(p: &Params) -> Self {
        Subaction {
            c0: 0.0,
            c1: -1.0,
            gamma_slope: p.gamma_slope,
        }
    }

    pub fn u1(p: &Params) -> Self {
        Subaction {
            c0: -p.gamma_slope,
            c1: 0.0,
            gamma_slope: p.gamma_slope,
        }
    }

    fn combine(&self, d0: f64, d1: f64) -> f64 {
        (self.c0 - d0).max(self.c1 - self.gamma_slope * d1)
    }

    pub fn eval_word(&self, w: &Word) -> Result<f64> {
        let d0 = dist_to_fixed(w, Symbol::Zero)?.value;
        let d1 = dist_to_fixed(w, Symbol::One)?.value;
        Ok(self.combine(d0, d1))
    }

    pub fn eval_ring(&self, r: Ring) -> Result<f64> {
        let (d0, d1) = match r {
            Ring::Fix0 => (0.0, 1.0),
            Ring::Fix1 => (1.0, 0.0),
            Ring::TwoHead => (1.0, 1.0),
            Ring::ZeroRun(n) => ((-f64::from(n)).exp2(), 1.0),
            Ring::OneRun(n) => (1.0, (-f64::from(n)).exp2()),
            Ring::Tail0(_) | Ring::Tail1(_) => return Err(Error::TailRing(r.to_string())),
        };
        Ok(self.combine(d0, d1))
    }
}

/// `V(1^∞) − V(0^∞)` and `γ = lim (1/β) log P`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VSolution {
    pub alpha: f64,
    pub gamma_slope: f64,
    pub delta_v: f64,
    pub gamma: f64,
    /// Theorem-backed (slope 3) rather than a numerical estimate.
    pub certified: bool,
}

impl VSolution {
    pub fn subaction(&self) -> Subaction {
        Subaction {
            c0: 0.0,
            c1: self.delta_v,
            gamma_slope: self.gamma_slope,
        }
    }
}

pub fn solve_v(alpha: f64, gamma_slope: f64) -> Result<VSolution> {
    let p = Params::new(alpha, gamma_slope, ESTIMATE_BETA)?;
    if gamma_slope == 3.0 {
        let (delta_v, gamma) = if alpha > 1.0 {
            (1.0, -2.0)
        } else {
            (alpha, -(1.0 + alpha))
        };
        return Ok(VSolution {
            alpha,
            gamma_slope,
            delta_v,
            gamma,
            certified: true,
        });
    }
    let cf = ClosedForm::solve(&p, 1e-14)?;
    let beta = p.beta;
    Ok(VSolution {
        alpha,
        gamma_slope,
        delta_v: (cf.h_fix1.ln_abs() - cf.h_fix0.ln_abs()) / beta,
        gamma: cf.pressure.ln() / beta,
        certified: false,
    })
}

/// Rings `Fix0, Fix1, [2], 0ⁿ∗₀, 1ⁿ∗₁` for `n ≤ depth`.
pub fn rings_to_depth(depth: u32) -> Vec<Ring> {
    let mut out = vec![Ring::Fix0, Ring::Fix1, Ring::TwoHead];
    for n in 1..=depth {
        out.push(Ring::ZeroRun(n));
        out.push(Ring::OneRun(n));
    }
    out
}

/// `max_r |V(r) − max_branches(A + V)|` with `m(A) = 0`.
pub fn verify_calibration(s: &Subaction, p: &Params, depth: u32) -> Result<f64> {
    p.validate()?;
    let mut worst = 0.0f64;
    for r in rings_to_depth(depth) {
        let mut best = f64::NEG_INFINITY;
        for b in preimage_rings(r, p)? {
            best = best.max(b.potential + s.eval_ring(b.ring)?);
        }
        worst = worst.max((s.eval_ring(r)? - best).abs());
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VComparisonRow {
    pub beta: f64,
    /// `sup_r |(1/β)(log H(r) − log H(1^∞)) − (V(r) − V(1^∞))|`
    pub sup_distance: f64,
    /// `(1/β) log(H(1^∞)/H(0^∞))`
    pub delta_v_estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VComparison {
    pub solution: VSolution,
    pub rows: Vec<VComparisonRow>,
    /// Whether `sup_distance` decreased along the grid.
    pub decreasing: bool,
}

pub const COMPARE_DEPTH: u32 = 20;

pub fn compare_v_to_h(p: &Params, beta_grid: &[f64]) -> Result<VComparison> {
    p.validate()?;
    let solution = solve_v(p.alpha, p.gamma_slope)?;
    let v = solution.subaction();
    let v_ref = v.eval_ring(Ring::Fix1)?;
    let rings = rings_to_depth(COMPARE_DEPTH);
    let mut rows = Vec::with_capacity(beta_grid.len());
    for &beta in beta_grid {
        if !(beta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "beta grid needs beta > 0, got {beta}"
            )));
        }
        let q = p.with_beta(beta)?;
        let cf = ClosedForm::solve(&q, 1e-14)?;
        let h_ref = cf.h_fix1.ln_abs();
        let mut sup = 0.0f64;
        for &r in &rings {
            let est = (cf.h_ring(r)?.ln_abs() - h_ref) / beta;
            sup = sup.max((est - (v.eval_ring(r)? - v_ref)).abs());
        }
        rows.push(VComparisonRow {
            beta,
            sup_distance: sup,
            delta_v_estimate: (h_ref - cf.h_fix0.ln_abs()) / beta,
        });
    }
    let decreasing = rows
        .windows(2)
        .all(|w| w[1].sup_distance <= w[0].sup_distance);
    Ok(VComparison {
        solution,
        rows,
        decreasing,
    })
}
