//! The coupling function `h`, the root equation `g`, and the case analysis
//! that decides where `h` attains its minimum.
//!
//! For an admissible tuple,
//!
//! ```text
//! h(τ) = (1 + τ^p) / (1 + τ^β + τ^{p*})^{p/p*}
//! g(τ) = p* + α τ^β − β τ^{β−p} − p* τ^{p*−p}
//! h'(τ) = f(τ) g(τ),   f(τ) = p τ^{p−1} / (p* (1 + τ^β + τ^{p*})^{p/p*+1})
//! ```
//!
//! so the positive critical points of `h` are exactly the roots of `g`.
//! `h(0) = 1` and `h(τ) → 1` as `τ → ∞`; [`classify`] locates every root of
//! `g`, picks the global minimizer `τ_min` of `h` over the roots and `0`, and
//! builds the synchronized coefficients `λ`, `μ = τ_min λ`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{cmp_to_p, ParamSet};
use crate::roots::{bisect, log_grid, newton_polish, sign_change_brackets, Bracket};

/// Default number of log-spaced samples used by [`classify`].
pub const DEFAULT_GRID_N: usize = 4000;

/// Smallest `τ` scanned unless the small-`τ` asymptotics demand more.
pub const TAU_LOWER: f64 = 1e-8;

const TAU_FLOOR: f64 = 1e-300;
const TAU_CEIL: f64 = 1e300;
const DOMINANCE: f64 = 10.0;
const BISECT_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 50;
const TIE_TOL: f64 = 1e-12;

fn ln_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `h(τ)`, evaluated in log form so that very large `τ` does not overflow.
pub fn h_eval(tau: f64, params: &ParamSet) -> f64 {
    f_eta_eval(tau, 1.0, params)
}

/// The `η`-weighted quotient `(1 + τ^p) / (η + τ^β + τ^{p*})^{p/p*}`.
pub fn f_eta_eval(tau: f64, eta: f64, params: &ParamSet) -> f64 {
    debug_assert!(tau >= 0.0 && eta > 0.0);
    let (p, b, ps) = (params.p(), params.beta(), params.p_star());
    if tau == 0.0 {
        return eta.powf(-p / ps);
    }
    let t = tau.ln();
    let num = ln_sum_exp(&[0.0, p * t]);
    let den = ln_sum_exp(&[eta.ln(), b * t, ps * t]);
    (num - p / ps * den).exp()
}

/// `g(τ)`; defined for `τ > 0`.
pub fn g_eval(tau: f64, params: &ParamSet) -> f64 {
    g_eta_eval(tau, 1.0, params)
}

/// `η p* + α τ^β − β τ^{β−p} − p* τ^{p*−p}`.
pub fn g_eta_eval(tau: f64, eta: f64, params: &ParamSet) -> f64 {
    let (p, a, b, ps) = (params.p(), params.alpha(), params.beta(), params.p_star());
    eta * ps + a * tau.powf(b) - b * tau.powf(b - p) - ps * tau.powf(ps - p)
}

/// `g'(τ) = τ^{β−p−1} g₁(τ)`.
pub fn g_prime(tau: f64, params: &ParamSet) -> f64 {
    let (p, b) = (params.p(), params.beta());
    tau.powf(b - p - 1.0) * g1_eval(tau, params)
}

/// The bracket in `g'`: `g₁(τ) = αβ τ^p − p*(p*−p) τ^α − β(β−p)`.
pub fn g1_eval(tau: f64, params: &ParamSet) -> f64 {
    let (p, a, b, ps) = (params.p(), params.alpha(), params.beta(), params.p_star());
    a * b * tau.powf(p) - ps * (ps - p) * tau.powf(a) - b * (b - p)
}

/// The nonnegative factor `f` in `h' = f g`.
pub fn h_prime_factor(tau: f64, params: &ParamSet) -> f64 {
    let (p, b, ps) = (params.p(), params.beta(), params.p_star());
    if tau == 0.0 {
        return 0.0;
    }
    let t = tau.ln();
    let ln_den = ln_sum_exp(&[0.0, b * t, ps * t]);
    p / ps * ((p - 1.0) * t - (p / ps + 1.0) * ln_den).exp()
}

/// `h'(τ)` through the factorization `f(τ) g(τ)`.
pub fn h_prime(tau: f64, params: &ParamSet) -> f64 {
    h_prime_factor(tau, params) * g_eval(tau, params)
}

/// The seven cases of the root analysis of `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CouplingCase {
    /// `β < p`.
    One,
    /// `β = p = α`, which forces `N = 2sp`.
    TwoI,
    /// `β = p`, `α < p`.
    TwoIi,
    /// `β = p`, `α > p`.
    TwoIii,
    /// `β > p`, `α > p`.
    ThreeI,
    /// `β > p`, `α < p`.
    ThreeIi,
    /// `β > p`, `α = p`.
    ThreeIii,
}

impl CouplingCase {
    pub const ALL: [CouplingCase; 7] = [
        CouplingCase::One,
        CouplingCase::TwoI,
        CouplingCase::TwoIi,
        CouplingCase::TwoIii,
        CouplingCase::ThreeI,
        CouplingCase::ThreeIi,
        CouplingCase::ThreeIii,
    ];

    pub fn of(params: &ParamSet) -> Self {
        let p = params.p();
        match (cmp_to_p(params.beta(), p), cmp_to_p(params.alpha(), p)) {
            (Ordering::Less, _) => CouplingCase::One,
            (Ordering::Equal, Ordering::Equal) => CouplingCase::TwoI,
            (Ordering::Equal, Ordering::Less) => CouplingCase::TwoIi,
            (Ordering::Equal, Ordering::Greater) => CouplingCase::TwoIii,
            (Ordering::Greater, Ordering::Greater) => CouplingCase::ThreeI,
            (Ordering::Greater, Ordering::Less) => CouplingCase::ThreeIi,
            (Ordering::Greater, Ordering::Equal) => CouplingCase::ThreeIii,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CouplingCase::One => "1",
            CouplingCase::TwoI => "2i",
            CouplingCase::TwoIi => "2ii",
            CouplingCase::TwoIii => "2iii",
            CouplingCase::ThreeI => "3i",
            CouplingCase::ThreeIi => "3ii",
            CouplingCase::ThreeIii => "3iii",
        }
    }

    /// Whether the minimum of `h` is attained at some `τ > 0`.
    pub fn tau_min_positive(&self) -> bool {
        matches!(self, CouplingCase::One | CouplingCase::TwoIi | CouplingCase::ThreeIi)
    }

    /// Admissible numbers of positive roots of `g`.
    ///
    /// Case 1 splits: with `α ≥ p`, `g → −∞` at both ends and `g(1) = α − β > 0`,
    /// so there are two roots; with `α < p`, `g` runs from `−∞` to `+∞` and
    /// has one or three.
    pub fn expected_root_counts(&self, params: &ParamSet) -> &'static [usize] {
        match self {
            CouplingCase::One => {
                if cmp_to_p(params.alpha(), params.p()) == Ordering::Less {
                    &[1, 3]
                } else {
                    &[2]
                }
            }
            CouplingCase::TwoIi | CouplingCase::ThreeIi => &[2],
            _ => &[1],
        }
    }
}

impl fmt::Display for CouplingCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauClassification {
    pub case_label: CouplingCase,
    /// Sorted positive roots of `g`.
    pub g_roots: Vec<f64>,
    pub tau_min: f64,
    pub h_at_tau_min: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Whether the root count matches [`CouplingCase::expected_root_counts`].
    pub root_count_consistent: bool,
}

/// `(coefficient, exponent)` pairs of `g` with equal exponents merged.
fn g_terms(params: &ParamSet, eta: f64) -> Vec<(f64, f64)> {
    let (p, a, b, ps) = (params.p(), params.alpha(), params.beta(), params.p_star());
    let raw = [(eta * ps, 0.0), (a, b), (-b, b - p), (-ps, ps - p)];
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (c, e) in raw {
        match merged.iter_mut().find(|(_, e2)| (e - *e2).abs() < 1e-12) {
            Some(slot) => slot.0 += c,
            None => merged.push((c, e)),
        }
    }
    merged.retain(|(c, _)| *c != 0.0);
    merged
}

/// Walks `τ` outward until the term with the extreme exponent exceeds
/// `DOMINANCE` times the sum of the others; beyond that point `g` keeps a
/// fixed sign.
fn dominance_point(terms: &[(f64, f64)], toward_infinity: bool, start: f64, cap: f64) -> f64 {
    let pick = |x: &&(f64, f64), y: &&(f64, f64)| x.1.partial_cmp(&y.1).unwrap();
    let dom = if toward_infinity {
        terms.iter().max_by(pick)
    } else {
        terms.iter().min_by(pick)
    };
    let Some(&(dc, de)) = dom else { return start };
    let mut tau = start;
    loop {
        // rest / lead, computed without forming either
        let ratio: f64 = terms
            .iter()
            .filter(|(_, e)| *e != de)
            .map(|(c, e)| (c / dc).abs() * ((e - de) * tau.ln()).exp())
            .sum();
        if DOMINANCE * ratio < 1.0 {
            return tau;
        }
        let next = if toward_infinity { tau * 2.0 } else { tau * 0.5 };
        if (toward_infinity && next > cap) || (!toward_infinity && next < cap) {
            return cap;
        }
        tau = next;
    }
}

/// Upper end of the root search: past this point the leading term of `g`
/// dominates the rest tenfold.
pub fn default_tau_max(params: &ParamSet) -> f64 {
    dominance_point(&g_terms(params, 1.0), true, 10.0, TAU_CEIL).max(10.0)
}

/// Lower end of the root search: [`TAU_LOWER`], pushed further toward zero
/// when the small-`τ` asymptotics have not set in yet.
pub fn default_tau_min(params: &ParamSet) -> f64 {
    dominance_point(&g_terms(params, 1.0), false, TAU_LOWER, TAU_FLOOR).min(TAU_LOWER)
}

/// `Σ c τ^e` divided by `τ^{e_ref}`, where `e_ref` is the largest exponent
/// for `τ > 1` and the smallest otherwise. Same sign as the sum, finite for
/// every positive `τ`.
fn scaled_sum(terms: &[(f64, f64)], tau: f64) -> f64 {
    let t = tau.ln();
    let pick = if t > 0.0 { f64::max } else { f64::min };
    let e_ref = terms.iter().map(|x| x.1).fold(if t > 0.0 { f64::MIN } else { f64::MAX }, pick);
    terms.iter().map(|&(c, e)| c * ((e - e_ref) * t).exp()).sum()
}

fn scan_roots<S, F, D>(sign: S, f: F, df: D, lo: f64, hi: f64, grid_n: usize) -> Vec<f64>
where
    S: Fn(f64) -> f64,
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let grid = log_grid(lo, hi, grid_n);
    let values: Vec<f64> = grid.iter().map(|&t| sign(t)).collect();
    let mut roots: Vec<f64> = sign_change_brackets(&values)
        .into_iter()
        .map(|br| match br {
            Bracket::Exact(i) => grid[i],
            Bracket::Between(i) => {
                let (a, b) = bisect(&sign, grid[i], grid[i + 1], BISECT_TOL);
                let mid = 0.5 * (a + b);
                // the unscaled form overflows far from 1
                if f(grid[i]).is_finite() && f(grid[i + 1]).is_finite() {
                    newton_polish(&f, &df, mid, grid[i], grid[i + 1], NEWTON_MAX_ITER)
                } else {
                    mid
                }
            }
        })
        .collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    roots
}

/// All sign changes of `g` on a log-uniform grid over
/// `[default_tau_min, tau_max]`, bisected and Newton-polished.
///
/// A root count that disagrees with the case prediction is logged as a
/// warning; the roots are returned regardless.
pub fn find_g_roots(params: &ParamSet, tau_max: f64, grid_n: usize) -> Vec<f64> {
    assert!(tau_max > 0.0, "tau_max must be positive");
    assert!(grid_n >= 100, "grid_n must be at least 100");
    let lo = default_tau_min(params).min(tau_max * 1e-3);
    let terms = g_terms(params, 1.0);
    let roots = scan_roots(
        |t| scaled_sum(&terms, t),
        |t| g_eval(t, params),
        |t| g_prime(t, params),
        lo,
        tau_max,
        grid_n,
    );
    let case = CouplingCase::of(params);
    if !case.expected_root_counts(params).contains(&roots.len()) {
        log::warn!(
            "g has {} root(s) on ({lo:e}, {tau_max:e}] for case {case} ({:?}); expected {:?}",
            roots.len(),
            params.to_raw(),
            case.expected_root_counts(params)
        );
    }
    roots
}

/// Roots of the `η`-perturbed equation `g_η(τ) = 0`.
pub fn find_g_eta_roots(params: &ParamSet, eta: f64, tau_max: f64, grid_n: usize) -> Vec<f64> {
    assert!(eta > 0.0 && tau_max > 0.0 && grid_n >= 100);
    let terms = g_terms(params, eta);
    let lo = dominance_point(&terms, false, TAU_LOWER, TAU_FLOOR)
        .min(TAU_LOWER)
        .min(tau_max * 1e-3);
    // g_η differs from g by a constant, so g' is unchanged
    scan_roots(
        |t| scaled_sum(&terms, t),
        |t| g_eta_eval(t, eta, params),
        |t| g_prime(t, params),
        lo,
        tau_max,
        grid_n,
    )
}

/// `λ` from `λ^{p*−p} = p* / (p* + α τ^β)`.
pub fn lambda_for(tau: f64, params: &ParamSet) -> f64 {
    let (p, a, b, ps) = (params.p(), params.alpha(), params.beta(), params.p_star());
    let ln_den = ln_sum_exp(&[ps.ln(), a.ln() + b * tau.ln()]);
    ((ps.ln() - ln_den) / (ps - p)).exp()
}

pub fn classify(params: &ParamSet) -> TauClassification {
    classify_with(params, default_tau_max(params), DEFAULT_GRID_N)
}

/// [`classify`] with an explicit search range and grid size.
pub fn classify_with(params: &ParamSet, tau_max: f64, grid_n: usize) -> TauClassification {
    let case_label = CouplingCase::of(params);
    let g_roots = find_g_roots(params, tau_max, grid_n);

    let mut tau_min = 0.0;
    let mut best = h_eval(0.0, params);
    for &r in &g_roots {
        let hr = h_eval(r, params);
        // ties resolve to the larger root
        if hr < best || (hr - best).abs() <= TIE_TOL {
            best = hr;
            tau_min = r;
        }
    }
    let lambda = lambda_for(tau_min, params);
    let root_count_consistent = case_label
        .expected_root_counts(params)
        .contains(&g_roots.len());
    if case_label.tau_min_positive() != (tau_min > 0.0) {
        log::warn!(
            "case {case_label} predicts tau_min {} 0 but the sampled minimum is at {tau_min:e}",
            if case_label.tau_min_positive() { ">" } else { "=" }
        );
    }
    TauClassification {
        case_label,
        g_roots,
        tau_min,
        h_at_tau_min: best,
        lambda,
        mu: tau_min * lambda,
        root_count_consistent,
    }
}

/// Residuals of the two synchronized-form relations at `(λ, μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncResiduals {
    pub first: f64,
    pub second: f64,
}

impl SyncResiduals {
    /// Names of the relations whose residual is not below `tol`.
    pub fn failing(&self, tol: f64) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !(self.first < tol) {
            out.push("first (lambda) relation");
        }
        if !(self.second < tol) {
            out.push("second (mu) relation");
        }
        out
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        let failing = self.failing(tol);
        if failing.is_empty() {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "synchronized relation(s) violated: {} (residuals {:e}, {:e})",
                failing.join(", "),
                self.first,
                self.second
            )))
        }
    }
}

/// `|λ^{p*−p} + (α/p*) μ^β λ^{α−p} − 1|` and
/// `|μ^{p*−p} + (β/p*) μ^{β−p} λ^α − 1|`.
pub fn sync_residuals(lambda: f64, mu: f64, params: &ParamSet) -> SyncResiduals {
    let (p, a, b, ps) = (params.p(), params.alpha(), params.beta(), params.p_star());
    let (ll, lm) = (lambda.ln(), mu.ln());
    // 0 · ln 0 must stay 0
    let lp = |e: f64, l: f64| if e == 0.0 { 0.0 } else { e * l };
    let term = |c: f64, e_mu: f64, e_lambda: f64| (c.ln() + lp(e_mu, lm) + lp(e_lambda, ll)).exp();
    SyncResiduals {
        first: (((ps - p) * ll).exp() + term(a / ps, b, a - p) - 1.0).abs(),
        second: (((ps - p) * lm).exp() + term(b / ps, b - p, a) - 1.0).abs(),
    }
}

pub fn verify_sync_relations(
    classification: &TauClassification,
    params: &ParamSet,
) -> Result<SyncResiduals> {
    if !(classification.tau_min > 0.0) {
        return Err(Error::Precondition(
            "synchronized relations need tau_min > 0".into(),
        ));
    }
    Ok(sync_residuals(
        classification.lambda,
        classification.mu,
        params,
    ))
}

/// `S_{α,β} = h(τ_min) S`.
pub fn s_alpha_beta_from_scalar(scalar_constant: f64, classification: &TauClassification) -> f64 {
    classification.h_at_tau_min * scalar_constant
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sym() -> ParamSet {
        ParamSet::new(4, 0.5, 2.0, 4.0 / 3.0, 4.0 / 3.0).unwrap()
    }

    #[test]
    fn h_limits() {
        let ps = sym();
        assert_eq!(h_eval(0.0, &ps), 1.0);
        assert!((h_eval(1e6, &ps) - 1.0).abs() < 1e-3);
        assert!((h_eval(1e200, &ps) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn h_at_one_symmetric() {
        // 2 / 3^{p/p*} with p/p* = 3/4
        assert_relative_eq!(
            h_eval(1.0, &sym()),
            2.0 / 3f64.powf(0.75),
            max_relative = 1e-14
        );
        assert_relative_eq!(h_eval(1.0, &sym()), 0.877383, epsilon = 1e-6);
    }

    #[test]
    fn g_at_one_is_alpha_minus_beta() {
        let ps = ParamSet::from_alpha(1, 0.25, 1.8, 1.5).unwrap();
        assert_relative_eq!(
            g_eval(1.0, &ps),
            ps.alpha() - ps.beta(),
            epsilon = 1e-14
        );
        // alpha = beta = p
        let ps = ParamSet::new(2, 0.5, 2.0, 2.0, 2.0).unwrap();
        assert_eq!(g_eval(1.0, &ps), 0.0);
        for t in [0.3, 2.0, 5.0] {
            assert_relative_eq!(
                g_eval(t, &ps),
                2.0 - 2.0 * t.powf(2.0),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn g_at_two_sign_change_nearby() {
        let ps = sym();
        let want = 8.0 / 3.0 + 4.0 / 3.0 * 2f64.powf(4.0 / 3.0)
            - 4.0 / 3.0 * 2f64.powf(-2.0 / 3.0)
            - 8.0 / 3.0 * 2f64.powf(2.0 / 3.0);
        assert_relative_eq!(g_eval(2.0, &ps), want, max_relative = 1e-14);
        // an independent scan over (0, 100] finds a sign change, and g(1) = 0
        let grid: Vec<f64> = (1..=10_000).map(|i| i as f64 * 0.01).collect();
        let changes = grid
            .windows(2)
            .filter(|w| g_eval(w[0], &ps) * g_eval(w[1], &ps) <= 0.0)
            .count();
        assert!(changes >= 1);
    }

    #[test]
    fn h_prime_matches_finite_difference() {
        let ps = sym();
        let t = 0.5;
        let step = 1e-6;
        let fd = (h_eval(t + step, &ps) - h_eval(t - step, &ps)) / (2.0 * step);
        assert_relative_eq!(h_prime(t, &ps), fd, max_relative = 1e-6);
        assert!(h_prime(1.0, &ps).abs() < 1e-14);
    }

    #[test]
    fn eta_reductions() {
        let ps = ParamSet::from_alpha(1, 0.25, 1.8, 1.5).unwrap();
        for t in [0.1, 1.0, 7.0] {
            assert_eq!(g_eta_eval(t, 1.0, &ps), g_eval(t, &ps));
            assert_eq!(f_eta_eval(t, 1.0, &ps), h_eval(t, &ps));
        }
        let eta = 1.3;
        assert_relative_eq!(
            g_eta_eval(1.0, eta, &ps),
            (eta - 1.0) * ps.p_star() + ps.alpha() - ps.beta(),
            epsilon = 1e-13
        );
        assert_eq!(f_eta_eval(0.0, 1.0, &ps), 1.0);
        assert_relative_eq!(
            f_eta_eval(0.0, 2.0, &ps),
            2f64.powf(-ps.p() / ps.p_star()),
            max_relative = 1e-15
        );
    }

    #[test]
    fn eta_root_near_tau_min() {
        let ps = ParamSet::from_alpha(1, 0.25, 1.8, 1.5).unwrap();
        let roots = find_g_eta_roots(&ps, 1.05, default_tau_max(&ps), 4000);
        assert!(!roots.is_empty());
        for r in roots {
            assert!(g_eta_eval(r, 1.05, &ps).abs() < 1e-10, "{r}");
        }
    }

    #[test]
    fn case_two_i_single_root_at_one() {
        let ps = ParamSet::new(2, 0.5, 2.0, 2.0, 2.0).unwrap();
        let roots = find_g_roots(&ps, default_tau_max(&ps), 1000);
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 1.0).abs() < 1e-12);
        let c = classify(&ps);
        assert_eq!(c.case_label, CouplingCase::TwoI);
        assert_eq!(c.tau_min, 0.0);
        assert_eq!(c.h_at_tau_min, 1.0);
        assert_eq!(c.lambda, 1.0);
        assert_eq!(c.mu, 0.0);
        assert!(verify_sync_relations(&c, &ps).is_err());
    }

    #[test]
    fn case_two_ii_roots_straddle_critical_point() {
        // beta = p exactly, alpha = p* - p < p needs N > 2sp
        let (n, s, p) = (3u32, 0.6, 2.0);
        let ps_star = crate::exponents::critical_exponent(n, s, p).unwrap();
        let ps = ParamSet::new(n, s, p, ps_star - p, p).unwrap();
        assert_eq!(CouplingCase::of(&ps), CouplingCase::TwoIi);
        let roots = find_g_roots(&ps, default_tau_max(&ps), 4000);
        assert_eq!(roots.len(), 2);
        let crit = (ps.p_star() / p).powf(1.0 / (p - ps.alpha()));
        assert!(roots[0] < crit && crit < roots[1]);
        let c = classify(&ps);
        assert_eq!(c.tau_min, roots[1]);
        assert!(c.h_at_tau_min < 1.0);
    }

    #[test]
    fn case_three_ii_picks_larger_root() {
        let ps = ParamSet::from_alpha(1, 0.5, 1.5, 1.2).unwrap();
        let c = classify(&ps);
        assert_eq!(c.case_label, CouplingCase::ThreeIi);
        assert_eq!(c.g_roots.len(), 2);
        assert_eq!(c.tau_min, c.g_roots[1]);
        assert!(c.h_at_tau_min < 1.0);
    }

    #[test]
    fn symmetric_tuple_classification() {
        let ps = sym();
        let c = classify(&ps);
        assert_eq!(c.case_label, CouplingCase::One);
        assert!(c.g_roots.iter().any(|r| (r - 1.0).abs() < 1e-10));
        assert!(c.tau_min > 0.0);
        assert!(c.h_at_tau_min <= h_eval(1.0, &ps) + 1e-15);
        // grid minimum of h over (0, 100]
        let grid_min = (1..=100_000)
            .map(|i| h_eval(i as f64 * 1e-3, &ps))
            .fold(f64::INFINITY, f64::min);
        assert!(c.h_at_tau_min <= grid_min + 1e-12);
        let r = verify_sync_relations(&c, &ps).unwrap();
        assert!(r.first < 1e-9 && r.second < 1e-9);
    }

    #[test]
    fn sync_residuals_flag_bad_pairs() {
        let ps = sym();
        let r = sync_residuals(1.0, 1.0, &ps);
        assert!(r.first > 0.1);
        assert_eq!(r.failing(1e-9).len(), 2);
        assert!(r.check(1e-9).is_err());
    }

    #[test]
    fn lambda_relation_holds() {
        let ps = ParamSet::from_alpha(1, 0.25, 1.8, 1.5).unwrap();
        let c = classify(&ps);
        let lhs = c.lambda.powf(ps.p_star() - ps.p())
            * (ps.p_star() + ps.alpha() * c.tau_min.powf(ps.beta()));
        assert_relative_eq!(lhs, ps.p_star(), max_relative = 1e-10);
        assert_eq!(c.mu, c.tau_min * c.lambda);
    }

    #[test]
    fn s_alpha_beta_scaling() {
        let ps = sym();
        let c = classify(&ps);
        let one = s_alpha_beta_from_scalar(1.0, &c);
        assert_eq!(one, c.h_at_tau_min);
        assert_eq!(s_alpha_beta_from_scalar(2.0, &c), 2.0 * one);
        let degenerate = classify(&ParamSet::new(2, 0.5, 2.0, 2.0, 2.0).unwrap());
        assert_eq!(s_alpha_beta_from_scalar(3.5, &degenerate), 3.5);
    }

    #[test]
    fn tau_max_respects_dominance() {
        for ps in [
            sym(),
            ParamSet::from_alpha(1, 0.5, 1.5, 1.2).unwrap(),
            ParamSet::new(1, 0.5, 1.5, 3.0, 3.0).unwrap(),
        ] {
            let tm = default_tau_max(&ps);
            assert!(tm >= 10.0 && tm.is_finite());
            let lo = default_tau_min(&ps);
            assert!(lo <= TAU_LOWER && lo > 0.0);
        }
    }
}
