//! Truncated ring-basis representation of the transfer operator
//! `(Lφ)(x) = Σ_{σy=x} e^{βA(y)} φ(y)`.
//!
//! Ring-constant functions are mapped to ring-constant functions, so `L`
//! acts on the finite state set
//! `Fix0, 0¹∗₀ … 0ᴺ∗₀, Tail0, Fix1, 1¹∗₁ … 1ᴺ∗₁, Tail1, [2]`.
//! Rings deeper than `N` are collapsed into the tail states. This module
//! is the independent numerical oracle for the closed forms in
//! [`crate::closedform`]; at large β it only evaluates residuals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ringspace::{preimage_rings, Params, Ring};
use crate::signed_log::SignedLog;

pub const MIN_DEPTH: usize = 3;
pub const DEFAULT_SMALL_BETA_CAP: f64 = 4.0;

/// Relative residual above which a supplied `P` is rejected as not being an
/// eigenvalue of the truncated operator.
pub const EIGEN_CONSISTENCY_TOL: f64 = 1e-6;

/// Depth giving `truncation_bound <= 1e-10` for every supported β.
pub fn default_depth(p: &Params) -> usize {
    let scale = p.gamma_slope * p.beta;
    let extra = if scale > 1.0 {
        scale.log2().ceil() as usize + 40
    } else {
        40
    };
    extra.max(48)
}

/// Upper bound on the relative error of any row weight caused by collapsing
/// the rings deeper than `depth`.
pub fn truncation_bound(p: &Params, depth: usize) -> f64 {
    (p.gamma_slope * p.beta * (-(depth as f64 + 1.0)).exp2()).exp_m1()
}

/// Ring-indexed state layout for a given depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    depth: usize,
}

impl Layout {
    pub fn new(depth: usize) -> Result<Self> {
        if depth < MIN_DEPTH {
            return Err(Error::DepthTooSmall(depth));
        }
        if depth > u32::MAX as usize / 2 {
            return Err(Error::InvalidArgument(format!("depth {depth} too large")));
        }
        Ok(Layout { depth })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        2 * self.depth + 5
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, r: Ring) -> Option<usize> {
        let n_max = self.depth;
        let run = |n: u32| {
            let n = n as usize;
            (1..=n_max).contains(&n).then_some(n)
        };
        match r {
            Ring::Fix0 => Some(0),
            Ring::ZeroRun(n) => run(n),
            Ring::Tail0(n) if n as usize == n_max => Some(n_max + 1),
            Ring::Fix1 => Some(n_max + 2),
            Ring::OneRun(n) => run(n).map(|k| n_max + 2 + k),
            Ring::Tail1(n) if n as usize == n_max => Some(2 * n_max + 3),
            Ring::TwoHead => Some(2 * n_max + 4),
            Ring::Tail0(_) | Ring::Tail1(_) => None,
        }
    }

    pub fn ring(&self, i: usize) -> Option<Ring> {
        let n = self.depth;
        let d = n as u32;
        Some(match i {
            0 => Ring::Fix0,
            i if i <= n => Ring::ZeroRun(i as u32),
            i if i == n + 1 => Ring::Tail0(d),
            i if i == n + 2 => Ring::Fix1,
            i if i <= 2 * n + 2 => Ring::OneRun((i - n - 2) as u32),
            i if i == 2 * n + 3 => Ring::Tail1(d),
            i if i == 2 * n + 4 => Ring::TwoHead,
            _ => return None,
        })
    }

    pub fn rings(&self) -> impl Iterator<Item = Ring> + '_ {
        (0..self.len()).filter_map(move |i| self.ring(i))
    }

    /// Fold rings deeper than the truncation into the matching tail state.
    fn fold(&self, r: Ring) -> Ring {
        let d = self.depth as u32;
        match r {
            Ring::ZeroRun(n) if n > d => Ring::Tail0(d),
            Ring::OneRun(n) if n > d => Ring::Tail1(d),
            other => other,
        }
    }
}

/// Values indexed by the truncated ring basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingVector {
    layout: Layout,
    entries: Vec<SignedLog>,
}

impl RingVector {
    pub fn filled(layout: Layout, value: SignedLog) -> Self {
        RingVector {
            layout,
            entries: vec![value; layout.len()],
        }
    }

    pub fn from_fn(layout: Layout, mut f: impl FnMut(Ring) -> SignedLog) -> Self {
        let entries = layout.rings().map(&mut f).collect();
        RingVector { layout, entries }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn depth(&self) -> usize {
        self.layout.depth
    }

    pub fn entries(&self) -> &[SignedLog] {
        &self.entries
    }

    pub fn get(&self, r: Ring) -> Option<SignedLog> {
        self.layout.index(r).map(|i| self.entries[i])
    }

    pub fn set(&mut self, r: Ring, v: SignedLog) -> Result<()> {
        let i = self
            .layout
            .index(r)
            .ok_or_else(|| Error::InvalidArgument(format!("ring {r} not in layout")))?;
        self.entries[i] = v;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (Ring, SignedLog)> + '_ {
        self.layout.rings().zip(self.entries.iter().copied())
    }

    pub fn total(&self) -> SignedLog {
        self.entries.iter().sum()
    }

    pub fn scaled(&self, factor: SignedLog) -> RingVector {
        RingVector {
            layout: self.layout,
            entries: self.entries.iter().map(|&v| v * factor).collect(),
        }
    }

    /// Largest relative deviation over entries (0/0 counts as 0).
    pub fn max_rel_diff(&self, reference: &RingVector) -> f64 {
        self.entries
            .iter()
            .zip(&reference.entries)
            .map(|(a, b)| a.rel_diff(*b))
            .fold(0.0, f64::max)
    }
}

/// One branch term of a row: `weight · v[source]`, with `weight = e^{ln_weight}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub source: usize,
    pub ln_weight: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TruncatedOperator {
    params: Params,
    layout: Layout,
    rows: Vec<[Term; 3]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `L v = e^P v` (eigenfunction)
    Right,
    /// `L* v = e^P v` (eigenmeasure)
    Left,
}

/// Pressure, eigenfunction, eigenmeasure and their residuals.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenTriple {
    pub pressure: f64,
    pub h: RingVector,
    pub nu: RingVector,
    pub residual_h: f64,
    pub residual_nu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub small_beta_cap: f64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            tol: 1e-14,
            max_iter: 2_000_000,
            small_beta_cap: DEFAULT_SMALL_BETA_CAP,
        }
    }
}

pub fn build_operator(p: &Params, depth: usize) -> Result<TruncatedOperator> {
    p.validate()?;
    let layout = Layout::new(depth)?;
    let beta = p.beta;
    let d = depth as u32;
    let tail_ln = -beta * (-(depth as f64 + 2.0)).exp2();
    let mut rows = Vec::with_capacity(layout.len());
    for ring in layout.rings() {
        let row = match ring {
            Ring::Tail0(_) | Ring::Tail1(_) => {
                let (self_ring, slope) = if matches!(ring, Ring::Tail0(_)) {
                    (Ring::Tail0(d), 1.0)
                } else {
                    (Ring::Tail1(d), p.gamma_slope)
                };
                // a deep ring's other two branches coincide with those of any run ring
                let proxy = if slope == 1.0 {
                    Ring::ZeroRun(d)
                } else {
                    Ring::OneRun(d)
                };
                let mut terms = branch_terms(&layout, proxy, p)?;
                let deep = if slope == 1.0 { 0 } else { 1 };
                terms[deep] = Term {
                    source: layout.index(self_ring).expect("tail in layout"),
                    ln_weight: slope * tail_ln,
                };
                terms
            }
            r => branch_terms(&layout, r, p)?,
        };
        rows.push(row);
    }
    Ok(TruncatedOperator {
        params: *p,
        layout,
        rows,
    })
}

fn branch_terms(layout: &Layout, r: Ring, p: &Params) -> Result<[Term; 3]> {
    let branches = preimage_rings(r, p)?;
    let mut out = [Term {
        source: 0,
        ln_weight: 0.0,
    }; 3];
    for (slot, b) in out.iter_mut().zip(branches) {
        let target = layout.fold(b.ring);
        *slot = Term {
            source: layout.index(target).expect("folded ring in layout"),
            ln_weight: p.beta * b.potential,
        };
    }
    Ok(out)
}

impl TruncatedOperator {
    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn depth(&self) -> usize {
        self.layout.depth
    }

    pub fn row(&self, r: Ring) -> Option<&[Term; 3]> {
        self.layout.index(r).map(|i| &self.rows[i])
    }

    /// `L v`.
    pub fn apply(&self, v: &RingVector) -> RingVector {
        let entries = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| v.entries[t.source].scale_exp(t.ln_weight))
                    .sum()
            })
            .collect();
        RingVector {
            layout: self.layout,
            entries,
        }
    }

    /// `L* m`: transpose action on ring masses.
    pub fn apply_adjoint(&self, m: &RingVector) -> RingVector {
        let mut out = vec![SignedLog::ZERO; self.layout.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for t in row {
                out[t.source] = out[t.source] + m.entries[i].scale_exp(t.ln_weight);
            }
        }
        RingVector {
            layout: self.layout,
            entries: out,
        }
    }

    /// Leading eigenpair by power iteration, normalized to `H(Fix1) = 1`.
    ///
    /// The gap between `e^P` and the unit self-weight at the fixed points
    /// closes like `e^{-2β}`, so this is only offered for small β.
    pub fn leading_pair_power(&self, opts: &PowerOptions) -> Result<(f64, RingVector)> {
        let beta = self.params.beta;
        if beta > opts.small_beta_cap {
            return Err(Error::BetaAboveCap {
                beta,
                cap: opts.small_beta_cap,
            });
        }
        let n = self.layout.len();
        let weights: Vec<[(usize, f64); 3]> = self
            .rows
            .iter()
            .map(|row| row.map(|t| (t.source, t.ln_weight.exp())))
            .collect();
        let fix1 = self.layout.index(Ring::Fix1).expect("Fix1");
        let mut v = vec![1.0f64; n];
        let mut next = vec![0.0f64; n];
        let mut ln_lambda = f64::NAN;
        let mut last_change = f64::INFINITY;
        for _ in 0..opts.max_iter {
            for (out, row) in next.iter_mut().zip(&weights) {
                *out = row.iter().map(|&(s, w)| w * v[s]).sum();
            }
            let new_ln_lambda = (next.iter().sum::<f64>() / v.iter().sum::<f64>()).ln();
            let norm = next[fix1];
            let mut vec_change = 0.0f64;
            for (a, b) in next.iter_mut().zip(v.iter()) {
                *a /= norm;
                vec_change = vec_change.max((*a / b).ln().abs());
            }
            std::mem::swap(&mut v, &mut next);
            last_change = (new_ln_lambda - ln_lambda).abs().max(vec_change);
            ln_lambda = new_ln_lambda;
            if last_change <= opts.tol {
                let entries = v.iter().map(|&x| SignedLog::from_f64(x)).collect();
                return Ok((
                    ln_lambda,
                    RingVector {
                        layout: self.layout,
                        entries,
                    },
                ));
            }
        }
        Err(Error::NoConvergence {
            iterations: opts.max_iter,
            last_change,
        })
    }

    /// Eigenfunction for a given `P` by back-substitution along the two run
    /// chains, normalized to `H(Fix1) = 1`.
    pub fn eigenfunction_given_p(&self, pressure: f64) -> Result<RingVector> {
        check_pressure(pressure)?;
        let p = &self.params;
        let depth = self.layout.depth;
        let lambda = SignedLog::exp(pressure);
        let lambda_m1 = SignedLog::from_f64(pressure.exp_m1());
        let t = SignedLog::exp(-p.alpha * p.beta);

        // chain values relative to the fixed-point value they converge to
        let chain = |slope: f64| -> Result<Vec<SignedLog>> {
            let tail_ln = -slope * p.beta * (-(depth as f64 + 2.0)).exp2();
            // e^P - e^{tail_ln} = e^{tail_ln} expm1(P - tail_ln)
            let denom = SignedLog::from_f64((pressure - tail_ln).exp_m1()).scale_exp(tail_ln);
            if !denom.is_positive() {
                return Err(Error::TailDivergence);
            }
            let mut vals = vec![SignedLog::ZERO; depth + 2];
            vals[depth + 1] = lambda_m1 / denom;
            for n in (1..=depth).rev() {
                let w = -slope * p.beta * (-(n as f64 + 1.0)).exp2();
                vals[n] = (vals[n + 1].scale_exp(w) + lambda_m1) / lambda;
            }
            Ok(vals)
        };
        let zeta = chain(1.0)?;
        let omega = chain(p.gamma_slope)?;

        let a0 = -0.5 * p.beta;
        let a1 = -0.5 * p.gamma_slope * p.beta;
        let lambda_minus_t = SignedLog::from_f64((pressure + p.alpha * p.beta).exp_m1()) * t;
        let numer = lambda_m1 * lambda_minus_t - t * omega[1].scale_exp(a1);
        if !numer.is_positive() || !lambda_minus_t.is_positive() {
            return Err(Error::Singular {
                pressure,
                residual: f64::INFINITY,
            });
        }
        let h1 = SignedLog::ONE;
        let h0 = numer / (lambda * zeta[1].scale_exp(a0));
        let h2 = (zeta[1].scale_exp(a0) * h0 + omega[1].scale_exp(a1) * h1) / lambda_minus_t;

        let lay = self.layout;
        let h = RingVector::from_fn(lay, |r| match r {
            Ring::Fix0 => h0,
            Ring::Fix1 => h1,
            Ring::TwoHead => h2,
            Ring::ZeroRun(n) => zeta[n as usize] * h0,
            Ring::Tail0(_) => zeta[depth + 1] * h0,
            Ring::OneRun(n) => omega[n as usize] * h1,
            Ring::Tail1(_) => omega[depth + 1] * h1,
        });
        let res = self.residual(pressure, &h, Side::Right);
        if !(res <= EIGEN_CONSISTENCY_TOL) {
            return Err(Error::Singular {
                pressure,
                residual: res,
            });
        }
        Ok(h)
    }

    /// Eigenmeasure for a given `P` from the conformal recursion with a
    /// geometric tail closure, normalized to total mass 1.
    ///
    /// The 2×2 elimination subtracts `k₀k₁` from 1, which loses digits once
    /// `k₀k₁ → 1` at large β; this is the small-β oracle.
    pub fn eigenmeasure_given_p(&self, pressure: f64) -> Result<RingVector> {
        check_pressure(pressure)?;
        let p = &self.params;
        let depth = self.layout.depth;

        // ring masses relative to the first ring of the chain
        let chain = |slope: f64| -> Result<(Vec<SignedLog>, SignedLog)> {
            let mut rel = vec![SignedLog::ZERO; depth + 2];
            rel[1] = SignedLog::ONE;
            for n in 1..depth {
                let w = -slope * p.beta * (-(n as f64 + 1.0)).exp2();
                rel[n + 1] = rel[n].scale_exp(-pressure + w);
            }
            let w_last = -slope * p.beta * (-(depth as f64 + 1.0)).exp2();
            let w_tail = -slope * p.beta * (-(depth as f64 + 2.0)).exp2();
            let keep = -pressure + w_tail;
            if keep >= 0.0 {
                return Err(Error::TailDivergence);
            }
            // 1 - e^{keep}
            let closure = SignedLog::from_f64(-keep.exp_m1());
            rel[depth + 1] = rel[depth].scale_exp(-pressure + w_last) / closure;
            let total: SignedLog = rel[1..].iter().sum();
            Ok((rel, total))
        };
        let (rel0, kappa0) = chain(1.0)?;
        let (rel1, kappa1) = chain(p.gamma_slope)?;
        let k0 = kappa0.scale_exp(-pressure - 0.5 * p.beta);
        let k1 = kappa1.scale_exp(-pressure - 0.5 * p.gamma_slope * p.beta);
        let nu2 = SignedLog::exp(-pressure - p.alpha * p.beta);
        let det = SignedLog::ONE - k0 * k1;
        if !det.is_positive() {
            return Err(Error::Singular {
                pressure,
                residual: f64::INFINITY,
            });
        }
        let nu0 = k0 * (SignedLog::ONE + k1) * nu2 / det;
        let nu1 = k1 * (SignedLog::ONE + k0) * nu2 / det;
        let star0 = nu0 / kappa0;
        let star1 = nu1 / kappa1;
        let m = RingVector::from_fn(self.layout, |r| match r {
            Ring::Fix0 | Ring::Fix1 => SignedLog::ZERO,
            Ring::TwoHead => nu2,
            Ring::ZeroRun(n) => rel0[n as usize] * star0,
            Ring::Tail0(_) => rel0[depth + 1] * star0,
            Ring::OneRun(n) => rel1[n as usize] * star1,
            Ring::Tail1(_) => rel1[depth + 1] * star1,
        });
        let total = m.total();
        Ok(m.scaled(total.recip()))
    }

    /// `max_i |(Lv)_i − e^P v_i| / |e^P v_i|` (or with `L*` for [`Side::Left`]).
    pub fn residual(&self, pressure: f64, v: &RingVector, side: Side) -> f64 {
        let applied = match side {
            Side::Right => self.apply(v),
            Side::Left => self.apply_adjoint(v),
        };
        applied
            .entries
            .iter()
            .zip(&v.entries)
            .map(|(lv, x)| lv.rel_diff(x.scale_exp(pressure)))
            .fold(0.0, f64::max)
    }

    /// Power-iteration oracle for the whole triple at small β.
    pub fn solve_small_beta(&self, opts: &PowerOptions) -> Result<EigenTriple> {
        let (pressure, h) = self.leading_pair_power(opts)?;
        let nu = self.eigenmeasure_given_p(pressure)?;
        Ok(EigenTriple {
            pressure,
            residual_h: self.residual(pressure, &h, Side::Right),
            residual_nu: self.residual(pressure, &nu, Side::Left),
            h,
            nu,
        })
    }
}

fn check_pressure(pressure: f64) -> Result<()> {
    if !(pressure > 0.0 && pressure <= 3f64.ln() * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "pressure {pressure} outside (0, ln 3]"
        )));
    }
    Ok(())
}
