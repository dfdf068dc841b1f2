//! The Gibbs measure `dμ = H dν` on rings, the selection ratio `μ[0]/μ[1]`,
//! the sandwich bound around `x·ν[0∗₀]/ν[1∗₁]`, and β→∞ extrapolation.

use serde::{Deserialize, Serialize};

use crate::closedform::{
    limit_targets, nu_ratio_cyl, nu_ratio_star, AsymptoticTargets, ClosedForm, Limit,
};
use crate::error::{Error, Result};
use crate::ringspace::{potential, ring_of, Params, Ring, Symbol, Word};
use crate::signed_log::SignedLog;
use crate::xferop::{default_depth, EigenTriple, RingVector};

/// Relative accuracy requested from the pressure solver.
pub const SOLVE_TOL: f64 = 1e-14;

/// Threshold above which the ring-ratio correction is known to stay below
/// `e^{-β/8}`. Scans of rings 3..=10 over β ∈ [0.01, 60] (step 0.01) and of
/// the full sandwich over β ∈ [0.05, 60] (step 0.05), for
/// α ∈ {0.5, 0.9, 1, 1.5, 2, 3}, found no violation; the worst ratio of
/// correction to bound was 0.18, at α = 0.5, β = 1.45, n = 3.
pub const CORRECTION_BETA0: f64 = 0.0;

/// Sweep grid used when none is given.
pub const DEFAULT_ALPHA_GRID: [f64; 3] = [0.5, 1.0, 2.0];
pub const DEFAULT_BETA_GRID: [f64; 10] = [0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GibbsRingMasses {
    pub params: Params,
    pub depth: usize,
    pub closed_form: ClosedForm,
    /// `μ(r) = H(r)ν(r)/Z`; tail states use `H(Fix)`.
    pub masses: RingVector,
    /// `Z = Σ H·ν`.
    pub normalizer: SignedLog,
    /// Largest `|H(first tail ring)/H(Fix) − 1|`.
    pub tail_error: f64,
}

pub fn gibbs_masses(p: &Params, depth: usize) -> Result<GibbsRingMasses> {
    gibbs_masses_from(&ClosedForm::solve(p, SOLVE_TOL)?, depth)
}

pub fn gibbs_masses_from(cf: &ClosedForm, depth: usize) -> Result<GibbsRingMasses> {
    let (h, nu) = cf.ring_vectors(depth)?;
    let d = depth as u32;
    let tail_error = h
        .get(Ring::Tail0(d))
        .expect("tail")
        .rel_diff(cf.h_fix0)
        .max(h.get(Ring::Tail1(d)).expect("tail").rel_diff(cf.h_fix1));
    let raw = RingVector::from_fn(h.layout(), |r| {
        let hv = match r {
            Ring::Tail0(_) => cf.h_fix0,
            Ring::Tail1(_) => cf.h_fix1,
            _ => h.get(r).expect("layout ring"),
        };
        hv * nu.get(r).expect("layout ring")
    });
    let normalizer = raw.total();
    if !normalizer.is_positive() || !normalizer.is_finite() {
        return Err(Error::NonPositive("Gibbs normalizer"));
    }
    Ok(GibbsRingMasses {
        params: cf.params,
        depth,
        closed_form: cf.clone(),
        masses: raw.scaled(normalizer.recip()),
        normalizer,
        tail_error,
    })
}

impl GibbsRingMasses {
    fn chain_mass(&self, a: Symbol) -> SignedLog {
        self.masses
            .iter()
            .filter(|(r, _)| match a {
                Symbol::Zero => matches!(r, Ring::ZeroRun(_) | Ring::Tail0(_)),
                Symbol::One => matches!(r, Ring::OneRun(_) | Ring::Tail1(_)),
                Symbol::Two => matches!(r, Ring::TwoHead),
            })
            .map(|(_, m)| m)
            .sum()
    }

    pub fn mu0(&self) -> SignedLog {
        self.chain_mass(Symbol::Zero)
    }

    pub fn mu1(&self) -> SignedLog {
        self.chain_mass(Symbol::One)
    }

    pub fn mu2(&self) -> SignedLog {
        self.chain_mass(Symbol::Two)
    }

    pub fn total(&self) -> SignedLog {
        self.masses.total()
    }

    /// `ν([w])` from conformality, `ν([w]) = e^{-P+βA}ν([σw])` on resolved
    /// words and the closed-form ring sums on constant words.
    pub fn nu_cylinder(&self, w: &Word) -> Result<SignedLog> {
        let cf = &self.closed_form;
        let p = &self.params;
        if w.is_empty() {
            return Ok(SignedLog::ONE);
        }
        let cls = ring_of(w)?;
        if cls.unresolved {
            let len = w.len() as u32;
            return Ok(match cls.ring {
                Ring::ZeroRun(_) => {
                    crate::closedform::nu_tail_mass(len - 1, cf.pressure, p.beta, cf.nu.star0)?
                }
                _ => crate::closedform::nu_tail_mass(
                    len - 1,
                    cf.pressure,
                    p.gamma_slope * p.beta,
                    cf.nu.star1,
                )?,
            });
        }
        let a = potential(cls.ring, p)?;
        Ok(self
            .nu_cylinder(&w.shift())?
            .scale_exp(-cf.pressure + p.beta * a))
    }

    /// `μ([w])`; constant words need `|w| ≤ depth`.
    pub fn mu_cylinder(&self, w: &Word) -> Result<SignedLog> {
        if w.is_empty() {
            return Ok(self.total());
        }
        let cls = ring_of(w)?;
        if cls.unresolved {
            let len = w.len() as u32;
            if len as usize > self.depth {
                return Err(Error::WordTooLong {
                    len: w.len(),
                    max: self.depth,
                });
            }
            let zero = matches!(cls.ring, Ring::ZeroRun(_));
            return Ok(self
                .masses
                .iter()
                .filter(|(r, _)| match (zero, r) {
                    (true, Ring::ZeroRun(n)) | (false, Ring::OneRun(n)) => *n >= len,
                    (true, Ring::Tail0(_)) | (false, Ring::Tail1(_)) => true,
                    _ => false,
                })
                .map(|(_, m)| m)
                .sum());
        }
        let h = self.closed_form.h_ring(cls.ring)?;
        Ok(h * self.nu_cylinder(w)? / self.normalizer)
    }

    /// `max |μ([w]) − Σ_a μ([aw])| / μ([w])` over all words up to `len`.
    pub fn invariance_error(&self, len: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        let mut words = vec![Word::new(Vec::new())?];
        for _ in 0..=len {
            let mut next = Vec::with_capacity(words.len() * 3);
            for w in &words {
                let mut pre = SignedLog::ZERO;
                for a in Symbol::ALL {
                    let aw = w.prepend(a)?;
                    pre = pre + self.mu_cylinder(&aw)?;
                    next.push(aw);
                }
                worst = worst.max(pre.rel_diff(self.mu_cylinder(w)?));
            }
            if next[0].len() > len {
                break;
            }
            words = next;
        }
        Ok(worst)
    }
}

/// `μ[0]/μ[1]` summed ring by ring with the tail closures.
pub fn selection_ratio(g: &GibbsRingMasses) -> SignedLog {
    g.mu0() / g.mu1()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub beta: f64,
    pub beta0: f64,
    pub applicable: bool,
    pub mu_ratio: SignedLog,
    /// `x·ν[0∗₀]/ν[1∗₁]`
    pub center: SignedLog,
    pub width: f64,
    /// `μ-ratio/center − (1 − e^{-β/8})`
    pub lower_margin: f64,
    /// `(1 + e^{-β/8}) − μ-ratio/center`
    pub upper_margin: f64,
    /// Largest ring-ratio correction over rings `3..=n_max`.
    pub max_correction: f64,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        !self.applicable || (self.lower_margin >= 0.0 && self.upper_margin >= 0.0)
    }
}

pub fn sandwich_check(p: &Params, n_max: u32) -> Result<SandwichReport> {
    let g = gibbs_masses(p, default_depth(p))?;
    sandwich_from(&g, n_max, CORRECTION_BETA0)
}

/// Sandwich of `μ[0]/μ[1]` around `x·e^{(Γ−3)β/2}·ν[0∗₀]/ν[1∗₁]`; the
/// exponential factor is 1 for slope 3.
pub fn sandwich_from(g: &GibbsRingMasses, n_max: u32, beta0: f64) -> Result<SandwichReport> {
    if n_max < 3 {
        return Err(Error::InvalidArgument("sandwich needs n_max >= 3".into()));
    }
    let cf = &g.closed_form;
    let beta = g.params.beta;
    let center = (cf.x() * nu_ratio_star(cf.pressure, &g.params)?)
        .scale_exp(0.5 * (g.params.gamma_slope - 3.0) * beta);
    let mu_ratio = selection_ratio(g);
    let rel = (mu_ratio / center).to_f64();
    let width = (-beta / 8.0).exp();
    let mut max_correction = 0.0f64;
    for n in 3..=n_max {
        max_correction = max_correction.max(cf.ring_ratio_deviation(n)?);
    }
    Ok(SandwichReport {
        beta,
        beta0,
        applicable: beta >= beta0,
        mu_ratio,
        center,
        width,
        lower_margin: rel - (1.0 - width),
        upper_margin: (1.0 + width) - rel,
        max_correction,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtrapolationMode {
    Aitken,
    Last,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolated {
    pub estimate: f64,
    pub uncertainty: f64,
}

/// Limit estimate of a sequence sampled along increasing β.
pub fn extrapolate(values: &[f64], mode: ExtrapolationMode) -> Result<Extrapolated> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Extrapolation("sequence is not finite".into()));
    }
    let n = values.len();
    match mode {
        ExtrapolationMode::Last => match values {
            [] => Err(Error::Extrapolation("empty sequence".into())),
            [v] => Ok(Extrapolated {
                estimate: *v,
                uncertainty: 0.0,
            }),
            [.., a, b] => Ok(Extrapolated {
                estimate: *b,
                uncertainty: (b - a).abs(),
            }),
        },
        ExtrapolationMode::Aitken => {
            if n < 3 {
                return Err(Error::Extrapolation("Aitken needs three values".into()));
            }
            let (a, b, c) = (values[n - 3], values[n - 2], values[n - 1]);
            let d1 = b - a;
            let d2 = c - b;
            let den = d2 - d1;
            if den == 0.0 || d1 == 0.0 || d2 == 0.0 {
                return Ok(Extrapolated {
                    estimate: c,
                    uncertainty: d2.abs(),
                });
            }
            let est = c - d2 * d2 / den;
            Ok(Extrapolated {
                estimate: est,
                uncertainty: (est - c).abs(),
            })
        }
    }
}

/// Acceptance verdict at the largest β of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitCheck {
    /// For finite targets `|μ-ratio − target|`; for divergent ones
    /// `|(1/β) log μ-ratio − rate|`.
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Tolerance on the selection ratio at β ≥ 60 for a finite target.
pub fn mu_ratio_tolerance(target: f64) -> f64 {
    if target == 1.0 {
        0.1
    } else {
        0.15
    }
}

/// Tolerance on `(1/β) log μ-ratio` when the target diverges.
pub const RATE_TOLERANCE: f64 = 0.05;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub alpha: f64,
    pub gamma_slope: f64,
    pub beta: f64,
    pub depth: usize,
    pub pressure: f64,
    pub log_p_over_beta: f64,
    pub p_e2beta: SignedLog,
    pub x_ratio: SignedLog,
    pub nu_cyl_ratio: SignedLog,
    pub nu_star_ratio: SignedLog,
    pub mu0: SignedLog,
    pub mu1: SignedLog,
    pub mu2: SignedLog,
    pub mu_ratio: SignedLog,
    pub targets: AsymptoticTargets,
    pub residual_h: f64,
    pub residual_nu: f64,
    pub tail_error: f64,
    /// Slope 3, where the limit table is a theorem.
    pub certified: bool,
    pub limit_check: Option<LimitCheck>,
}

impl SelectionRecord {
    pub fn compute(p: &Params, depth: Option<usize>) -> Result<Self> {
        Self::compute_with(p, depth, SOLVE_TOL)
    }

    /// As [`SelectionRecord::compute`] with an explicit solver tolerance.
    pub fn compute_with(p: &Params, depth: Option<usize>, tol: f64) -> Result<Self> {
        let depth = depth.unwrap_or_else(|| default_depth(p));
        let cf = ClosedForm::solve(p, tol)?;
        let triple: EigenTriple = cf.eigen_triple(depth)?;
        let g = gibbs_masses_from(&cf, depth)?;
        Ok(SelectionRecord {
            alpha: p.alpha,
            gamma_slope: p.gamma_slope,
            beta: p.beta,
            depth,
            pressure: cf.pressure,
            log_p_over_beta: if p.beta > 0.0 {
                cf.pressure.ln() / p.beta
            } else {
                f64::NAN
            },
            p_e2beta: cf.pressure_scaled(),
            x_ratio: cf.x(),
            nu_cyl_ratio: nu_ratio_cyl(cf.pressure, p)?,
            nu_star_ratio: nu_ratio_star(cf.pressure, p)?,
            mu0: g.mu0(),
            mu1: g.mu1(),
            mu2: g.mu2(),
            mu_ratio: selection_ratio(&g),
            targets: limit_targets(p.alpha)?,
            residual_h: triple.residual_h,
            residual_nu: triple.residual_nu,
            tail_error: g.tail_error,
            certified: p.gamma_slope == 3.0,
            limit_check: None,
        })
    }

    /// Compare against the β→∞ target.
    pub fn check_limit(&self) -> Option<LimitCheck> {
        match self.targets.mu_ratio {
            Limit::Finite { value } => {
                let deviation = (self.mu_ratio.to_f64() - value).abs();
                let tolerance = mu_ratio_tolerance(value);
                Some(LimitCheck {
                    deviation,
                    tolerance,
                    pass: deviation <= tolerance,
                })
            }
            Limit::Infinite { rate } if self.beta > 0.0 => {
                let deviation = (self.mu_ratio.ln_abs() / self.beta - rate).abs();
                Some(LimitCheck {
                    deviation,
                    tolerance: RATE_TOLERANCE,
                    pass: deviation <= RATE_TOLERANCE,
                })
            }
            _ => None,
        }
    }
}

/// One record per `(α, β)`, α-major; the largest-β record of each α carries
/// its limit check.
pub fn selection_report(
    alpha_grid: &[f64],
    beta_grid: &[f64],
    gamma_slope: f64,
) -> Result<Vec<SelectionRecord>> {
    let mut out = Vec::with_capacity(alpha_grid.len() * beta_grid.len());
    for &alpha in alpha_grid {
        for &beta in beta_grid {
            out.push(SelectionRecord::compute(
                &Params::new(alpha, gamma_slope, beta)?,
                None,
            )?);
        }
    }
    mark_limit_checks(&mut out);
    Ok(out)
}

/// Attach limit checks to the largest-β record of each α.
pub fn mark_limit_checks(records: &mut [SelectionRecord]) {
    let mut best: Vec<(f64, usize)> = Vec::new();
    for (i, r) in records.iter().enumerate() {
        match best.iter_mut().find(|(a, _)| *a == r.alpha) {
            Some(slot) if records[slot.1].beta < r.beta => slot.1 = i,
            Some(_) => {}
            None => best.push((r.alpha, i)),
        }
    }
    for (_, i) in best {
        records[i].limit_check = records[i].check_limit();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_zero_is_bernoulli() {
        let p = Params::standard(0.8, 0.0).unwrap();
        let g = gibbs_masses(&p, 20).unwrap();
        for n in 1..=20u32 {
            let expect = (1.0f64 / 3.0).powi(n as i32) * (2.0 / 3.0);
            assert!((g.masses.get(Ring::ZeroRun(n)).unwrap().to_f64() - expect).abs() < 1e-14);
        }
        assert!((g.mu2().to_f64() - 1.0 / 3.0).abs() < 1e-14);
        assert!((selection_ratio(&g).to_f64() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn masses_are_normalized() {
        for &(alpha, beta) in &[(0.5, 2.0), (1.0, 30.0), (2.0, 60.0)] {
            let p = Params::standard(alpha, beta).unwrap();
            let g = gibbs_masses(&p, default_depth(&p)).unwrap();
            assert!((g.total().to_f64() - 1.0).abs() < 1e-10);
            assert!(g
                .masses
                .entries()
                .iter()
                .all(|m| !m.is_positive() || m.is_finite()));
            assert!(g.tail_error < 1e-10);
        }
    }

    #[test]
    fn shift_invariance_small_beta() {
        let p = Params::standard(1.0, 2.0).unwrap();
        let g = gibbs_masses(&p, 48).unwrap();
        assert!(g.invariance_error(6).unwrap() <= 1e-8);
    }

    #[test]
    fn cylinder_masses_match_rings() {
        let p = Params::standard(0.5, 3.0).unwrap();
        let g = gibbs_masses(&p, 48).unwrap();
        let w = Word::from_digits(&[0, 0, 1]).unwrap();
        let from_ring = g.masses.get(Ring::ZeroRun(2)).unwrap();
        let from_cyls: SignedLog = [&[0u8, 0, 1][..], &[0, 0, 2]]
            .iter()
            .map(|d| g.mu_cylinder(&Word::from_digits(d).unwrap()).unwrap())
            .sum();
        assert!(from_ring.rel_diff(from_cyls) < 1e-12);
        assert!(g.mu_cylinder(&w).unwrap().is_positive());
        let ones = Word::from_digits(&[1]).unwrap();
        assert!(g.mu_cylinder(&ones).unwrap().rel_diff(g.mu1()) < 1e-14);
    }

    #[test]
    fn extrapolation_modes() {
        let c = extrapolate(&[2.0, 2.0, 2.0], ExtrapolationMode::Aitken).unwrap();
        assert_eq!((c.estimate, c.uncertainty), (2.0, 0.0));
        let c = extrapolate(&[2.0, 2.0], ExtrapolationMode::Last).unwrap();
        assert_eq!((c.estimate, c.uncertainty), (2.0, 0.0));
        let geo: Vec<f64> = (1..=6).map(|k| 1.0 + (-(k as f64)).exp2()).collect();
        let e = extrapolate(&geo, ExtrapolationMode::Aitken).unwrap();
        assert!((e.estimate - 1.0).abs() < 1e-6);
        let l = extrapolate(&geo, ExtrapolationMode::Last).unwrap();
        assert!((l.uncertainty - 1.0 / 64.0).abs() < 1e-15);
        assert!(extrapolate(&[1.0, f64::INFINITY, 2.0], ExtrapolationMode::Last).is_err());
        assert!(extrapolate(&[1.0, 2.0], ExtrapolationMode::Aitken).is_err());
        assert!(extrapolate(&[], ExtrapolationMode::Last).is_err());
    }

    #[test]
    fn sandwich_below_beta0_is_not_applicable() {
        let p = Params::standard(2.0, 1.0).unwrap();
        let g = gibbs_masses(&p, 48).unwrap();
        let r = sandwich_from(&g, 10, 2.0).unwrap();
        assert!(!r.applicable);
        assert!(r.holds());
        assert!(sandwich_from(&g, 2, 2.0).is_err());
    }

    #[test]
    fn sandwich_center_covers_other_slopes() {
        for gamma in [2.0, 5.0] {
            let p = Params::new(2.0, gamma, 40.0).unwrap();
            let r = sandwich_check(&p, 10).unwrap();
            assert!(r.applicable && r.holds(), "{r:?}");
        }
    }

    #[test]
    fn limit_checks_go_to_largest_beta() {
        let recs = selection_report(&[2.0], &[10.0, 60.0, 20.0], 3.0).unwrap();
        assert!(recs[0].limit_check.is_none());
        assert!(recs[1].limit_check.unwrap().pass);
        assert!(recs[2].limit_check.is_none());
    }
}
