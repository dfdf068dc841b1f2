//! Closed forms for the pressure, the eigenmeasure and the eigenfunction.
//!
//! Everything is driven by the series
//! `F(Z,β) = Σ_{k≥0} e^{-kZ} e^{β/2^{k+1}}` and its partial sums
//! `F_n(Z,β) = Σ_{k=0}^{n} e^{-kZ} e^{β/2^{k+1}}` (`F_{-1} = 0`).
//! With `g₀ = e^{-P-β}F(P,β)` and `g₁ = e^{-P-Γβ}F(P,Γβ)` the pressure is the
//! root of the secular equation
//! `e^{-P-αβ}(1+g₀)(1+g₁) = 1 − g₀g₁`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ringspace::{Params, Ring};
use crate::signed_log::SignedLog;
use crate::xferop::{build_operator, EigenTriple, RingVector, Side};

/// `(1+√5)/2`
pub const GOLDEN: f64 = 1.618_033_988_749_895;

pub const DEFAULT_F_EPS: f64 = 1e-17;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FValue {
    pub value: SignedLog,
    /// Relative bound on the dropped part of the correction series.
    pub truncation_error: f64,
    pub terms_used: usize,
}

/// `F(Z,β)` as `1/(1−e^{-Z}) + Σ_k e^{-kZ}(e^{β/2^{k+1}} − 1)`.
///
/// The geometric part is exact; each correction term is at most half the
/// previous one, so the dropped tail never exceeds the last term kept.
pub fn f_value(z: f64, beta: f64, eps: f64) -> Result<FValue> {
    let (geo, corr) = f_parts(z, beta, eps)?;
    Ok(FValue {
        value: geo + corr.value,
        truncation_error: corr.truncation_error * ratio(corr.value, geo + corr.value),
        terms_used: corr.terms_used,
    })
}

/// Geometric part and correction series of `F`, the latter with its own
/// relative truncation error.
fn f_parts(z: f64, beta: f64, eps: f64) -> Result<(SignedLog, FValue)> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidArgument(format!("F needs Z > 0, got {z}")));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "F needs beta >= 0, got {beta}"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "F needs eps > 0, got {eps}"
        )));
    }
    let geo = SignedLog::exp(-(-(-z).exp_m1()).ln());
    let mut corr = SignedLog::ZERO;
    let mut k = 0usize;
    loop {
        let arg = beta * (-(k as f64 + 1.0)).exp2();
        let bump = if arg < 1.0 {
            SignedLog::from_f64(arg.exp_m1())
        } else {
            SignedLog::exp(arg + (-(-arg).exp()).ln_1p())
        };
        let term = bump.scale_exp(-(k as f64) * z);
        corr = corr + term;
        k += 1;
        if ratio(term, corr) <= eps || k > 4096 {
            return Ok((
                geo,
                FValue {
                    value: corr,
                    truncation_error: ratio(term, corr),
                    terms_used: k,
                },
            ));
        }
    }
}

fn ratio(a: SignedLog, b: SignedLog) -> f64 {
    if a.is_zero() {
        0.0
    } else {
        (a.ln_abs() - b.ln_abs()).exp()
    }
}

/// `F(Z,β)` at the default precision.
pub fn f(z: f64, beta: f64) -> Result<SignedLog> {
    f_value(z, beta, DEFAULT_F_EPS).map(|v| v.value)
}

/// `F_n(Z,β)`; `n = -1` gives 0.
pub fn f_partial(n: i64, z: f64, beta: f64) -> Result<SignedLog> {
    if n < -1 {
        return Err(Error::InvalidArgument(format!(
            "partial sum index {n} < -1"
        )));
    }
    Ok((0..=n)
        .map(|k| SignedLog::exp(-(k as f64) * z + beta * (-(k as f64 + 1.0)).exp2()))
        .sum())
}

/// `|F(P,β) − 1/P|`, evaluated without cancelling `1/P` against the
/// geometric part.
pub fn f_minus_inverse(pressure: f64, beta: f64) -> Result<f64> {
    let corr = f_parts(pressure, beta, 1e-17)?.1.value;
    // 1/(1−e^{-P}) − 1/P
    let geo = if pressure < 1e-3 {
        0.5 + pressure / 12.0 - pressure.powi(3) / 720.0
    } else {
        (pressure + (-pressure).exp_m1()) / (pressure * -(-pressure).exp_m1())
    };
    Ok((corr + SignedLog::from_f64(geo)).abs().to_f64())
}

/// Upper bound `(βe^{β/2}/(2 ln 2))(2 + Σ_{n≥1}(P/ln 2)^n)` on
/// `|F(P,β) − 1/P|`, defined for `β > 2 ln 2` and `P < ln 2`.
pub fn f_tail_bound(pressure: f64, beta: f64) -> Option<f64> {
    let r = pressure / LN_2;
    if beta <= 2.0 * LN_2 || !(r < 1.0) {
        return None;
    }
    Some(beta * (0.5 * beta).exp() / (2.0 * LN_2) * (2.0 + r / (1.0 - r)))
}

/// Per-`P` building blocks shared by every closed form.
#[derive(Clone, Copy, Debug)]
struct Blocks {
    lambda: SignedLog,
    lambda_m1: SignedLog,
    t: SignedLog,
    f0: SignedLog,
    f1: SignedLog,
    g0: SignedLog,
    g1: SignedLog,
}

impl Blocks {
    fn new(pressure: f64, p: &Params) -> Result<Self> {
        if !(pressure > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pressure {pressure} must be > 0"
            )));
        }
        let f0 = f(pressure, p.beta)?;
        let f1 = f(pressure, p.gamma_slope * p.beta)?;
        Ok(Blocks {
            lambda: SignedLog::exp(pressure),
            lambda_m1: SignedLog::from_f64(pressure.exp_m1()),
            t: SignedLog::exp(-p.alpha * p.beta),
            f0,
            f1,
            g0: f0.scale_exp(-pressure - p.beta),
            g1: f1.scale_exp(-pressure - p.gamma_slope * p.beta),
        })
    }
}

/// `G(P)` exactly as displayed: `ν[2]·(1+g₀)(1+g₁)/(1−g₀g₁) − 1`.
///
/// The denominator loses all digits once `g₀g₁` is within rounding of 1,
/// which happens at the root for large β; the solver uses
/// [`secular_balance`] instead.
pub fn secular_g(pressure: f64, p: &Params) -> Result<SignedLog> {
    let b = Blocks::new(pressure, p)?;
    let one = SignedLog::ONE;
    let nu2 = SignedLog::exp(-pressure - p.alpha * p.beta);
    Ok(nu2 * (one + b.g0) * (one + b.g1) / (one - b.g0 * b.g1) - one)
}

/// `ln[e^{-P-αβ}(1+g₀)(1+g₁) + g₀g₁]`.
///
/// This is `G` with the denominator cleared; it is a sum of positive terms,
/// strictly decreasing in `P`, and vanishes exactly where `G` does on the
/// branch `g₀g₁ < 1`.
pub fn secular_balance(pressure: f64, p: &Params) -> Result<f64> {
    let b = Blocks::new(pressure, p)?;
    let one = SignedLog::ONE;
    let x = ((one + b.g0) * (one + b.g1)).scale_exp(-pressure - p.alpha * p.beta) + b.g0 * b.g1;
    Ok(x.ln_abs())
}

/// Root of the secular equation in `(0, ln 3]` to relative accuracy `tol`.
pub fn solve_pressure(p: &Params, tol: f64) -> Result<f64> {
    p.validate()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be > 0, got {tol}"
        )));
    }
    let ln3 = 3f64.ln();
    let top = secular_balance(ln3, p)?;
    if top.abs() <= 1e-14 {
        return Ok(ln3);
    }
    if top > 0.0 {
        return Err(Error::NoSignChange {
            g_lo: f64::NAN,
            g_hi: top,
        });
    }

    // phase 1: bracket and shrink in ln P
    let bal = |u: f64| secular_balance(u.exp(), p);
    let min_ln = f64::MIN_POSITIVE.ln();
    let floor = (-(2.0 + p.gamma_slope) * p.beta - 1.0).max(min_ln);
    let step = 0.5 * p.beta + 1.0;
    let mut lo = (-2.0 * p.beta - 1.0).min(ln3.ln() - 1.0).max(floor);
    let mut f_lo = bal(lo)?;
    while f_lo <= 0.0 {
        if lo <= floor {
            if floor == min_ln {
                return Err(Error::PressureUnderflow { ln_pressure: floor });
            }
            return Err(Error::NoSignChange {
                g_lo: f_lo,
                g_hi: top,
            });
        }
        lo = (lo - step).max(floor);
        f_lo = bal(lo)?;
    }
    let mut hi = ln3.ln();
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if bal(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // phase 2: plain bisection on P down to adjacent floats
    let (mut plo, mut phi) = (lo.exp(), hi.exp().min(ln3));
    if !(secular_balance(plo, p)? > 0.0) || !(secular_balance(phi, p)? <= 0.0) {
        return Err(Error::NoSignChange {
            g_lo: secular_balance(plo, p)?,
            g_hi: secular_balance(phi, p)?,
        });
    }
    loop {
        let mid = 0.5 * (plo + phi);
        if mid <= plo || mid >= phi {
            break;
        }
        if secular_balance(mid, p)? > 0.0 {
            plo = mid;
        } else {
            phi = mid;
        }
    }
    let root = 0.5 * (plo + phi);
    if (phi - plo) > tol * root {
        return Err(Error::NoConvergence {
            iterations: 0,
            last_change: (phi - plo) / root,
        });
    }
    let b = Blocks::new(root, p)?;
    let ln_den = b.g0.ln_abs() + b.g1.ln_abs();
    if ln_den > 1e-12 {
        return Err(Error::NonPositiveDenominator(root));
    }
    Ok(root)
}

/// `ν[0]/ν[1] = e^{(Γ−1)β}F(P,β)(1+g₁)/(F(P,Γβ)(1+g₀))`.
pub fn nu_ratio_cyl(pressure: f64, p: &Params) -> Result<SignedLog> {
    let b = Blocks::new(pressure, p)?;
    let one = SignedLog::ONE;
    Ok((b.f0 * (one + b.g1) / (b.f1 * (one + b.g0))).scale_exp((p.gamma_slope - 1.0) * p.beta))
}

/// `ν[0∗₀]/ν[1∗₁] = e^{(Γ−1)β/2}(1+g₁)/(1+g₀)`.
pub fn nu_ratio_star(pressure: f64, p: &Params) -> Result<SignedLog> {
    let b = Blocks::new(pressure, p)?;
    let one = SignedLog::ONE;
    Ok(((one + b.g1) / (one + b.g0)).scale_exp(0.5 * (p.gamma_slope - 1.0) * p.beta))
}

/// `ν[0ⁿ∗₀]/ν[1ⁿ∗₁] = e^{(Γ−1)β(1/2 − 1/2ⁿ)}·ν[0∗₀]/ν[1∗₁]`.
pub fn nu_ring_ratio(n: u32, pressure: f64, p: &Params) -> Result<SignedLog> {
    if n == 0 {
        return Err(Error::InvalidArgument("ring index must be >= 1".into()));
    }
    let shift = (p.gamma_slope - 1.0) * p.beta * (0.5 - (-f64::from(n)).exp2());
    Ok(nu_ratio_star(pressure, p)?.scale_exp(shift))
}

/// Cylinder and first-ring masses of the eigenmeasure.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NuMasses {
    pub nu0: SignedLog,
    pub nu1: SignedLog,
    pub nu2: SignedLog,
    pub star0: SignedLog,
    pub star1: SignedLog,
}

/// Eigenmeasure masses at the root `P`.
///
/// Uses `ν[0] = g₀/(1+g₀)`, which equals the displayed
/// `g₀(1+g₁)ν[2]/(1−g₀g₁)` once the secular equation holds, and avoids
/// the `1−g₀g₁` cancellation.
pub fn nu_masses(pressure: f64, p: &Params) -> Result<NuMasses> {
    let b = Blocks::new(pressure, p)?;
    let one = SignedLog::ONE;
    let d0 = one + b.g0;
    let d1 = one + b.g1;
    Ok(NuMasses {
        nu0: b.g0 / d0,
        nu1: b.g1 / d1,
        nu2: SignedLog::exp(-pressure - p.alpha * p.beta),
        star0: d0.recip().scale_exp(-pressure - 0.5 * p.beta),
        star1: d1
            .recip()
            .scale_exp(-pressure - 0.5 * p.gamma_slope * p.beta),
    })
}

/// The displayed `ν[0]`, `ν[1]` with the `1−g₀g₁` denominator.
pub fn nu_cylinders_displayed(pressure: f64, p: &Params) -> Result<(SignedLog, SignedLog)> {
    let b = Blocks::new(pressure, p)?;
    let one = SignedLog::ONE;
    let nu2 = SignedLog::exp(-pressure - p.alpha * p.beta);
    let den = one - b.g0 * b.g1;
    if !den.is_positive() {
        return Err(Error::NonPositiveDenominator(pressure));
    }
    Ok((
        b.g0 * (one + b.g1) * nu2 / den,
        b.g1 * (one + b.g0) * nu2 / den,
    ))
}

/// Coefficients and root of `x = (a + bx)/(dx + c)` for
/// `x = e^β H(0^∞)/H(1^∞)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FixedPointRatio {
    pub x: SignedLog,
    pub a: SignedLog,
    pub b: SignedLog,
    pub c: SignedLog,
    pub d: SignedLog,
    /// `|dx² + (c−b)x − a|` over the largest of its four terms.
    pub residual: f64,
}

pub fn fixed_point_ratio(pressure: f64, p: &Params) -> Result<FixedPointRatio> {
    let blk = Blocks::new(pressure, p)?;
    let beta = p.beta;
    let one = SignedLog::ONE;
    let damp = one + SignedLog::exp(-pressure - p.alpha * beta);
    let a = blk.lambda;
    let d = blk.lambda;
    let b = -(blk.f0 * damp).scale_exp(-2.0 * beta) - SignedLog::exp(-(1.0 + p.alpha) * beta);
    let c = -(blk.f1 * damp).scale_exp(-(p.gamma_slope - 1.0) * beta)
        - SignedLog::exp((1.0 - p.alpha) * beta);
    let s = b - c;
    let four = SignedLog::from_f64(4.0);
    let root = (s * s + four * a * d)
        .sqrt()
        .ok_or(Error::NonPositive("discriminant"))?;
    let two = SignedLog::from_f64(2.0);
    // pick the branch that adds like-signed terms
    let x = if s.is_positive() || s.is_zero() {
        (s + root) / (two * d)
    } else {
        two * a / (root - s)
    };
    if !x.is_positive() {
        return Err(Error::NonPositive("fixed-point ratio"));
    }
    let terms = [d * x * x, c * x, -(b * x), -a];
    let scale = terms
        .iter()
        .map(|t| t.ln_abs())
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: SignedLog = terms.iter().sum();
    let residual = if sum.is_zero() {
        0.0
    } else {
        (sum.ln_abs() - scale).exp()
    };
    Ok(FixedPointRatio {
        x,
        a,
        b,
        c,
        d,
        residual,
    })
}

/// Boundary conditions at the fixed points, each solved for `x`:
/// `e^{P+β}H(1^∞) = C₀H(0^∞)` and `e^{P+Γβ}H(0^∞) = C₁H(1^∞)`.
pub fn fixed_point_ratio_from_conditions(
    pressure: f64,
    p: &Params,
) -> Result<(SignedLog, SignedLog)> {
    let blk = Blocks::new(pressure, p)?;
    let damp = SignedLog::ONE + SignedLog::exp(-pressure - p.alpha * p.beta);
    let c0 = blk.f0 * damp + SignedLog::exp((1.0 - p.alpha) * p.beta);
    let c1 = blk.f1 * damp + SignedLog::exp((p.gamma_slope - p.alpha) * p.beta);
    Ok((
        c0.recip().scale_exp(pressure + 2.0 * p.beta),
        c1.scale_exp(-pressure - (p.gamma_slope - 1.0) * p.beta),
    ))
}

fn normalized_fixed_values(x: SignedLog, p: &Params) -> (SignedLog, SignedLog) {
    (x.scale_exp(-p.beta), SignedLog::ONE)
}

/// `H(0∗₀)`, `H(1∗₁)` as displayed, with `H(1^∞)=1`, `H(0^∞)=x e^{-β}`.
///
/// The brackets subtract nearly equal terms when `α < 1` and β is large;
/// [`ClosedForm`] uses the cancellation-free ring form there.
pub fn h_star_values(pressure: f64, p: &Params, x: SignedLog) -> Result<(SignedLog, SignedLog)> {
    h_ring_values(1, pressure, p, x)
}

/// `H(0ⁿ∗₀)`, `H(1ⁿ∗₁)` in the displayed form
/// `e^{(n−1)P − β/2ⁿ}(e^P−1)/(e^P+e^{-αβ})·[e^{P+β}H(1^∞) − (F_{n−2}(P,β)(1+e^{-P-αβ}) + e^{(1−α)β})H(0^∞)]`
/// and its mirror with slope Γ.
pub fn h_ring_values(
    n: u32,
    pressure: f64,
    p: &Params,
    x: SignedLog,
) -> Result<(SignedLog, SignedLog)> {
    if n == 0 {
        return Err(Error::InvalidArgument("ring index must be >= 1".into()));
    }
    let blk = Blocks::new(pressure, p)?;
    let (h0, h1) = normalized_fixed_values(x, p);
    let beta = p.beta;
    let gb = p.gamma_slope * beta;
    let damp = SignedLog::ONE + SignedLog::exp(-pressure - p.alpha * beta);
    let k = i64::from(n) - 2;
    let lead = blk.lambda_m1 / (blk.lambda + blk.t);
    let decay = -(f64::from(n)).exp2().recip();
    let rows = (f64::from(n) - 1.0) * pressure;

    let br0 = h1.scale_exp(pressure + beta)
        - (f_partial(k, pressure, beta)? * damp + SignedLog::exp((1.0 - p.alpha) * beta)) * h0;
    let br1 = h0.scale_exp(pressure + gb)
        - (f_partial(k, pressure, gb)? * damp + SignedLog::exp((p.gamma_slope - p.alpha) * beta))
            * h1;
    if !br0.is_positive() || !br1.is_positive() {
        return Err(Error::NonPositive("eigenfunction bracket"));
    }
    Ok((
        (lead * br0).scale_exp(rows + decay * beta),
        (lead * br1).scale_exp(rows + decay * gb),
    ))
}

/// `H([2]) = (e^P−1)(H(0^∞)+H(1^∞))/(e^P+e^{-αβ})`.
pub fn h_two(pressure: f64, p: &Params, h0: SignedLog, h1: SignedLog) -> Result<SignedLog> {
    let blk = Blocks::new(pressure, p)?;
    Ok(blk.lambda_m1 * (h0 + h1) / (blk.lambda + blk.t))
}

/// `H(aⁿ∗ₐ) = H(a^∞)(1−e^{-P})e^{-sβ/2ⁿ}F(P, sβ/2^{n−1})` with slope
/// `s = 1` for `a = 0` and `s = Γ` for `a = 1`.
///
/// Obtained from the displayed form by substituting the boundary condition
/// at `a^∞`; every term is positive.
pub fn h_ring_tail_form(
    n: u32,
    pressure: f64,
    slope_beta: f64,
    h_fix: SignedLog,
) -> Result<SignedLog> {
    if n == 0 {
        return Err(Error::InvalidArgument("ring index must be >= 1".into()));
    }
    let scale = (-f64::from(n) + 1.0).exp2();
    let series = f(pressure, slope_beta * scale)?;
    let one_minus = SignedLog::from_f64(-(-pressure).exp_m1());
    Ok((h_fix * one_minus * series).scale_exp(-0.5 * slope_beta * scale))
}

/// `Σ_{n>N} ν[0ⁿ∗₀] = ν[0∗₀]e^{-β/2}e^{-NP}F(P, β/2^N)` and its mirror.
pub fn nu_tail_mass(
    depth: u32,
    pressure: f64,
    slope_beta: f64,
    star: SignedLog,
) -> Result<SignedLog> {
    let scale = (-f64::from(depth)).exp2();
    Ok((star * f(pressure, slope_beta * scale)?)
        .scale_exp(-0.5 * slope_beta - f64::from(depth) * pressure))
}

/// Either a finite limit, a divergence to `+∞` at exponential `rate`, or no
/// meaningful limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Limit {
    Finite { value: f64 },
    Infinite { rate: f64 },
    NotApplicable,
}

impl Limit {
    pub fn finite(self) -> Option<f64> {
        match self {
            Limit::Finite { value } => Some(value),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticTargets {
    pub alpha: f64,
    pub mu_ratio: Limit,
    pub h_ratio: Limit,
    pub nu_star_ratio: Limit,
    pub pressure_scaled: Limit,
    pub gamma: f64,
}

/// β→∞ limits for slope 3.
pub fn limit_targets(alpha: f64) -> Result<AsymptoticTargets> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParams(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    let fin = |value| Limit::Finite { value };
    Ok(if alpha > 1.0 {
        AsymptoticTargets {
            alpha,
            mu_ratio: fin(1.0),
            h_ratio: fin(1.0),
            nu_star_ratio: fin(1.0),
            pressure_scaled: fin(1.0),
            gamma: -2.0,
        }
    } else if alpha == 1.0 {
        AsymptoticTargets {
            alpha,
            mu_ratio: fin(GOLDEN * GOLDEN),
            h_ratio: fin(GOLDEN),
            nu_star_ratio: fin(GOLDEN),
            pressure_scaled: fin(GOLDEN),
            gamma: -2.0,
        }
    } else {
        AsymptoticTargets {
            alpha,
            mu_ratio: Limit::Infinite {
                rate: 2.0 - 2.0 * alpha,
            },
            h_ratio: Limit::Infinite { rate: 1.0 - alpha },
            nu_star_ratio: Limit::Infinite { rate: 1.0 - alpha },
            pressure_scaled: Limit::NotApplicable,
            gamma: -(1.0 + alpha),
        }
    })
}

/// Pressure, eigenfunction and eigenmeasure at one parameter point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosedForm {
    pub params: Params,
    pub pressure: f64,
    pub fixed_point: FixedPointRatio,
    pub nu: NuMasses,
    pub h_fix0: SignedLog,
    pub h_fix1: SignedLog,
    pub h_two: SignedLog,
}

impl ClosedForm {
    pub fn solve(p: &Params, tol: f64) -> Result<Self> {
        let pressure = solve_pressure(p, tol)?;
        Self::at_pressure(p, pressure)
    }

    pub fn at_pressure(p: &Params, pressure: f64) -> Result<Self> {
        let fixed_point = fixed_point_ratio(pressure, p)?;
        let (h_fix0, h_fix1) = normalized_fixed_values(fixed_point.x, p);
        Ok(ClosedForm {
            params: *p,
            pressure,
            nu: nu_masses(pressure, p)?,
            h_two: h_two(pressure, p, h_fix0, h_fix1)?,
            fixed_point,
            h_fix0,
            h_fix1,
        })
    }

    pub fn x(&self) -> SignedLog {
        self.fixed_point.x
    }

    /// `P e^{2β}`.
    pub fn pressure_scaled(&self) -> SignedLog {
        SignedLog::exp(self.pressure.ln() + 2.0 * self.params.beta)
    }

    /// `H` on a ring; a tail state takes the value of its first ring.
    pub fn h_ring(&self, r: Ring) -> Result<SignedLog> {
        let p = &self.params;
        let gb = p.gamma_slope * p.beta;
        match r {
            Ring::Fix0 => Ok(self.h_fix0),
            Ring::Fix1 => Ok(self.h_fix1),
            Ring::TwoHead => Ok(self.h_two),
            Ring::ZeroRun(n) => h_ring_tail_form(n, self.pressure, p.beta, self.h_fix0),
            Ring::OneRun(n) => h_ring_tail_form(n, self.pressure, gb, self.h_fix1),
            Ring::Tail0(n) => h_ring_tail_form(n + 1, self.pressure, p.beta, self.h_fix0),
            Ring::Tail1(n) => h_ring_tail_form(n + 1, self.pressure, gb, self.h_fix1),
        }
    }

    /// `ν` on a ring; a tail state carries the exact mass of all deeper rings.
    pub fn nu_ring(&self, r: Ring) -> Result<SignedLog> {
        let p = &self.params;
        let gb = p.gamma_slope * p.beta;
        let run = |n: u32, slope_beta: f64, star: SignedLog| {
            let partial = 0.5 - (-f64::from(n)).exp2();
            star.scale_exp(-(f64::from(n) - 1.0) * self.pressure - slope_beta * partial)
        };
        match r {
            Ring::Fix0 | Ring::Fix1 => Ok(SignedLog::ZERO),
            Ring::TwoHead => Ok(self.nu.nu2),
            Ring::ZeroRun(n) => Ok(run(n, p.beta, self.nu.star0)),
            Ring::OneRun(n) => Ok(run(n, gb, self.nu.star1)),
            Ring::Tail0(n) => nu_tail_mass(n, self.pressure, p.beta, self.nu.star0),
            Ring::Tail1(n) => nu_tail_mass(n, self.pressure, gb, self.nu.star1),
        }
    }

    /// `|e^{β(1−(Γ−1)/2ⁿ)}(H(0ⁿ∗₀)/H(1ⁿ∗₁))/x − 1|`; for Γ=3 the prefactor
    /// is `e^{β(1−1/2^{n−1})}`.
    pub fn ring_ratio_deviation(&self, n: u32) -> Result<f64> {
        let p = &self.params;
        let z = self.h_ring(Ring::ZeroRun(n))?;
        let o = self.h_ring(Ring::OneRun(n))?;
        let scale = p.beta * (1.0 - (p.gamma_slope - 1.0) * (-f64::from(n)).exp2());
        Ok((z / (o * self.x()))
            .scale_exp(scale)
            .rel_diff(SignedLog::ONE))
    }

    pub fn ring_vectors(&self, depth: usize) -> Result<(RingVector, RingVector)> {
        let lay = crate::xferop::Layout::new(depth)?;
        let mut err = None;
        let mut grab = |v: Result<SignedLog>| {
            v.unwrap_or_else(|e| {
                err.get_or_insert(e);
                SignedLog::ZERO
            })
        };
        let h = RingVector::from_fn(lay, |r| grab(self.h_ring(r)));
        let nu = RingVector::from_fn(lay, |r| grab(self.nu_ring(r)));
        match err {
            Some(e) => Err(e),
            None => Ok((h, nu)),
        }
    }

    /// Closed-form vectors at `depth` with their truncated-operator residuals.
    pub fn eigen_triple(&self, depth: usize) -> Result<EigenTriple> {
        let op = build_operator(&self.params, depth)?;
        let (h, nu) = self.ring_vectors(depth)?;
        Ok(EigenTriple {
            pressure: self.pressure,
            residual_h: op.residual(self.pressure, &h, Side::Right),
            residual_nu: op.residual(self.pressure, &nu, Side::Left),
            h,
            nu,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std(alpha: f64, beta: f64) -> Params {
        Params::standard(alpha, beta).unwrap()
    }

    #[test]
    fn pressure_underflow_is_reported() {
        let p = std(2.0, 700.0);
        assert!(matches!(
            solve_pressure(&p, 1e-12),
            Err(Error::PressureUnderflow { ln_pressure }) if ln_pressure < -700.0
        ));
        assert!(solve_pressure(&std(2.0, 300.0), 1e-12).is_ok());
    }

    #[test]
    fn f_examples() {
        let v = f_value(LN_2, 0.0, 1e-17).unwrap();
        assert!((v.value.to_f64() - 2.0).abs() < 1e-15);
        let two = f_partial(1, LN_2, 2.0).unwrap().to_f64();
        assert!((two - 3.542_642_4).abs() < 1e-7);
        assert!((two - (1f64.exp() + 0.5 * 0.5f64.exp())).abs() < 1e-14);
        assert!(f_value(0.0, 1.0, 1e-17).is_err());
        assert!(f_value(-1.0, 1.0, 1e-17).is_err());
    }

    #[test]
    fn f_respects_eps_and_first_term() {
        for &(z, beta) in &[(1e-30, 120.0), (0.3, 5.0), (2.0, 0.5)] {
            let v = f_value(z, beta, 1e-12).unwrap();
            assert!(v.truncation_error <= 1e-12);
            assert!(v.value.ln().unwrap() >= 0.5 * beta);
            let tight = f_value(z, beta, 1e-17).unwrap();
            assert!(v.value.rel_diff(tight.value) <= 1e-12);
        }
        // tiny Z is handled without overflow
        let v = f_value(1e-200, 300.0, 1e-17).unwrap();
        assert!((v.value.ln().unwrap() - 200.0 * 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn f_partial_conventions() {
        assert_eq!(f_partial(-1, 0.4, 3.0).unwrap(), SignedLog::ZERO);
        assert!(f_partial(-2, 0.4, 3.0).is_err());
        let first = f_partial(0, 0.4, 3.0).unwrap();
        assert!(first.rel_diff(SignedLog::exp(1.5)) < 1e-15);
        let full = f(0.4, 3.0).unwrap();
        let mut prev = SignedLog::ZERO;
        for n in 0..200 {
            let s = f_partial(n, 0.4, 3.0).unwrap();
            assert!(s >= prev && s <= full * SignedLog::from_f64(1.0 + 1e-14));
            prev = s;
        }
        assert!(prev.rel_diff(full) < 1e-14);
    }

    #[test]
    fn beta_zero_pressure() {
        let p = std(0.7, 0.0);
        assert!((solve_pressure(&p, 1e-12).unwrap() - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_tol() {
        assert!(solve_pressure(&std(1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn displayed_g_vanishes_at_moderate_beta() {
        for &(alpha, beta) in &[(0.5, 1.0), (1.0, 3.0), (2.0, 5.0)] {
            let p = std(alpha, beta);
            let root = solve_pressure(&p, 1e-14).unwrap();
            assert!(secular_g(root, &p).unwrap().to_f64().abs() < 1e-9);
            assert!(secular_g(root * (1.0 - 1e-4), &p).unwrap().is_positive());
            assert!(!secular_g(root * (1.0 + 1e-4), &p).unwrap().is_positive());
            assert!(secular_balance(root * 0.5, &p).unwrap() > 0.0);
        }
        // the displayed form has its pole just below the root
        let p = std(2.0, 5.0);
        let root = solve_pressure(&p, 1e-14).unwrap();
        assert!(!secular_g(root * 0.99, &p).unwrap().is_positive());
    }

    #[test]
    fn pressure_scaled_at_beta_40() {
        let p = std(2.0, 40.0);
        let root = solve_pressure(&p, 1e-12).unwrap();
        let scaled = root * (80f64).exp();
        assert!((0.9..=1.1).contains(&scaled), "{scaled}");
    }

    #[test]
    fn nu_forms_agree_at_moderate_beta() {
        let p = Params::new(1.5, 2.0, 3.0).unwrap();
        let root = solve_pressure(&p, 1e-14).unwrap();
        let m = nu_masses(root, &p).unwrap();
        let (d0, d1) = nu_cylinders_displayed(root, &p).unwrap();
        assert!(m.nu0.rel_diff(d0) < 1e-9);
        assert!(m.nu1.rel_diff(d1) < 1e-9);
        assert!(((m.nu0 + m.nu1 + m.nu2).to_f64() - 1.0).abs() < 1e-13);
        assert!((m.nu0 / m.nu1).rel_diff(nu_ratio_cyl(root, &p).unwrap()) < 1e-13);
        assert!((m.star0 / m.star1).rel_diff(nu_ratio_star(root, &p).unwrap()) < 1e-13);
    }

    #[test]
    fn ring_ratio_identity() {
        let p = std(1.0, 7.0);
        let root = solve_pressure(&p, 1e-14).unwrap();
        let star = nu_ratio_star(root, &p).unwrap();
        assert_eq!(nu_ring_ratio(1, root, &p).unwrap(), star);
        let two = nu_ring_ratio(2, root, &p).unwrap();
        assert!(two.rel_diff(star.scale_exp(3.5)) < 1e-14);
    }

    #[test]
    fn quadratic_root_is_accurate() {
        for &(alpha, gamma, beta) in &[
            (2.0, 3.0, 60.0),
            (1.0, 3.0, 60.0),
            (0.5, 3.0, 80.0),
            (2.0, 5.0, 80.0),
            (0.9, 2.0, 0.5),
        ] {
            let p = Params::new(alpha, gamma, beta).unwrap();
            let root = solve_pressure(&p, 1e-12).unwrap();
            let fp = fixed_point_ratio(root, &p).unwrap();
            assert!(
                fp.residual <= 1e-12,
                "{alpha} {gamma} {beta}: {}",
                fp.residual
            );
            let (x0, x1) = fixed_point_ratio_from_conditions(root, &p).unwrap();
            assert!(fp.x.rel_diff(x0) < 1e-9, "{} vs {}", fp.x, x0);
            assert!(fp.x.rel_diff(x1) < 1e-9, "{} vs {}", fp.x, x1);
        }
    }

    #[test]
    fn displayed_h_matches_tail_form_at_small_beta() {
        let p = Params::new(0.5, 5.0, 2.0).unwrap();
        let cf = ClosedForm::solve(&p, 1e-14).unwrap();
        for n in 1..=10 {
            let (z, o) = h_ring_values(n, cf.pressure, &p, cf.x()).unwrap();
            assert!(z.rel_diff(cf.h_ring(Ring::ZeroRun(n)).unwrap()) < 1e-10);
            assert!(o.rel_diff(cf.h_ring(Ring::OneRun(n)).unwrap()) < 1e-10);
        }
        let (z1, o1) = h_star_values(cf.pressure, &p, cf.x()).unwrap();
        assert_eq!((z1, o1), h_ring_values(1, cf.pressure, &p, cf.x()).unwrap());
    }

    #[test]
    fn beta_zero_h_is_one() {
        let cf = ClosedForm::solve(&std(1.2, 0.0), 1e-12).unwrap();
        let (z, o) = h_star_values(cf.pressure, &cf.params, cf.x()).unwrap();
        assert!((z.to_f64() - 1.0).abs() < 1e-12);
        assert!((o.to_f64() - 1.0).abs() < 1e-12);
        assert!((cf.h_two.to_f64() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn limit_table() {
        let t = limit_targets(2.0).unwrap();
        assert_eq!(t.mu_ratio, Limit::Finite { value: 1.0 });
        assert_eq!(t.gamma, -2.0);
        let t = limit_targets(1.0).unwrap();
        assert!((t.mu_ratio.finite().unwrap() - 2.618_033_988_7).abs() < 1e-10);
        assert!((t.h_ratio.finite().unwrap() - 1.618_033_988_7).abs() < 1e-10);
        assert!((GOLDEN - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-16);
        let t = limit_targets(0.5).unwrap();
        assert_eq!(t.mu_ratio, Limit::Infinite { rate: 1.0 });
        assert_eq!(t.nu_star_ratio, Limit::Infinite { rate: 0.5 });
        assert_eq!(t.pressure_scaled, Limit::NotApplicable);
        assert_eq!(t.gamma, -1.5);
        assert!(limit_targets(0.0).is_err());
    }

    #[test]
    fn tail_bound_domain() {
        assert!(f_tail_bound(0.1, 1.0).is_none());
        assert!(f_tail_bound(0.8, 5.0).is_none());
        assert!(f_tail_bound(0.1, 5.0).is_some());
        let small = f_minus_inverse(1e-20, 10.0).unwrap();
        assert!(small > 5f64.exp() && small.is_finite());
    }
}
