//! The `γ`-coupled algebraic system
//!
//! ```text
//! F1(k, ℓ) = k^{(p*−p)/p} + (αγ/p*) k^{(α−p)/p} ℓ^{β/p} − 1 = 0
//! F2(k, ℓ) = ℓ^{(p*−p)/p} + (βγ/p*) ℓ^{(β−p)/p} k^{α/p} − 1 = 0
//! ```
//!
//! whose roots `(k, ℓ)` scale a scalar extremal `U` into solutions
//! `(k^{1/p} U, ℓ^{1/p} U)` of the coupled system. The least energy is
//! `(s/N)(k₀ + ℓ₀) S^{N/(sp)}` where `k₀` is the smallest root in `k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{regime_classify, ParamSet, GammaWindow};
use crate::roots::{bisect, sign_change_brackets, Bracket};

/// Default number of uniform samples in the `(0, 1]` scan of [`solve_all`].
pub const DEFAULT_SCAN_N: usize = 100_000;

/// Residual target for reported roots.
pub const ROOT_TOL: f64 = 1e-10;

const NEAR_ZERO_DECADES: i32 = 300;
const NEAR_ONE_DECADES: i32 = 14;
/// Roots closer than this in both coordinates (plus `1e-8` relative) are one.
const DEDUP_ABS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSystem {
    params: ParamSet,
    gamma: f64,
}

impl GammaSystem {
    pub fn new(params: ParamSet, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!("gamma = {gamma} must be positive")));
        }
        Ok(Self { params, gamma })
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The system with `(α, k)` and `(β, ℓ)` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            params: self.params.swapped(),
            gamma: self.gamma,
        }
    }

    fn q(&self) -> f64 {
        (self.params.p_star() - self.params.p()) / self.params.p()
    }

    fn f1_unchecked(&self, k: f64, l: f64) -> f64 {
        let (p, a, b, ps) = exps(&self.params);
        k.powf(self.q()) + a * self.gamma / ps * k.powf((a - p) / p) * l.powf(b / p) - 1.0
    }

    fn f2_unchecked(&self, k: f64, l: f64) -> f64 {
        self.swapped().f1_unchecked(l, k)
    }

    fn ell_of_k_unchecked(&self, k: f64) -> f64 {
        let (p, a, b, ps) = exps(&self.params);
        // 1 - k^q without cancellation near k = 1
        let gap = -(self.q() * k.ln()).exp_m1();
        (ps / (a * self.gamma)).powf(p / b) * k.powf((p - a) / b) * gap.max(0.0).powf(p / b)
    }
}

fn exps(params: &ParamSet) -> (f64, f64, f64, f64) {
    (params.p(), params.alpha(), params.beta(), params.p_star())
}

/// `F1(k, ℓ)` on `k > 0`, `ℓ ≥ 0`.
pub fn f1(k: f64, l: f64, sys: &GammaSystem) -> Result<f64> {
    if !(k > 0.0 && l >= 0.0) {
        return Err(Error::Domain(format!(
            "F1 needs k > 0 and l >= 0, got ({k}, {l})"
        )));
    }
    Ok(sys.f1_unchecked(k, l))
}

/// `F2(k, ℓ)` on `k ≥ 0`, `ℓ > 0`.
pub fn f2(k: f64, l: f64, sys: &GammaSystem) -> Result<f64> {
    if !(k >= 0.0 && l > 0.0) {
        return Err(Error::Domain(format!(
            "F2 needs k >= 0 and l > 0, got ({k}, {l})"
        )));
    }
    Ok(sys.f2_unchecked(k, l))
}

/// The branch of `F1 = 0` parametrized by `k ∈ (0, 1]`.
pub fn ell_of_k(k: f64, sys: &GammaSystem) -> Result<f64> {
    if !(k > 0.0 && k <= 1.0) {
        return Err(Error::Domain(format!("ell(k) needs k in (0, 1], got {k}")));
    }
    Ok(sys.ell_of_k_unchecked(k))
}

/// The branch of `F2 = 0` parametrized by `ℓ ∈ (0, 1]`.
pub fn k_of_ell(l: f64, sys: &GammaSystem) -> Result<f64> {
    if !(l > 0.0 && l <= 1.0) {
        return Err(Error::Domain(format!("k(l) needs l in (0, 1], got {l}")));
    }
    Ok(sys.swapped().ell_of_k_unchecked(l))
}

/// Analytic derivative of [`ell_of_k`]:
/// `C k^{(p−p*)/β} (1 − k^q)^{(p−β)/β} ((p−α)/β − k^q)`.
pub fn ell_prime(k: f64, sys: &GammaSystem) -> Result<f64> {
    if !(k > 0.0 && k <= 1.0) {
        return Err(Error::Domain(format!("ell'(k) needs k in (0, 1], got {k}")));
    }
    let (p, a, b, ps) = exps(sys.params());
    let kq = k.powf(sys.q());
    let gap = -(sys.q() * k.ln()).exp_m1();
    Ok((ps / (a * sys.gamma)).powf(p / b)
        * k.powf((p - ps) / b)
        * gap.powf((p - b) / b)
        * ((p - a) / b - kq))
}

fn require_window(params: &ParamSet, want: GammaWindow) -> Result<()> {
    let got = regime_classify(params).window;
    if got == want {
        Ok(())
    } else {
        Err(Error::Regime(format!(
            "needs {want:?}, tuple {:?} is in {got:?}",
            params.to_raw()
        )))
    }
}

/// Largest `γ` admitted when `α, β > p`.
pub fn gamma_upper_threshold(params: &ParamSet) -> Result<f64> {
    require_window(params, GammaWindow::WindowI)?;
    let (p, a, b, ps) = exps(params);
    let lead = ps * (ps - p) / p;
    let t1 = ((a - p) / (b - p)).powf((b - p) / p) / a;
    let t2 = ((b - p) / (a - p)).powf((a - p) / p) / b;
    Ok(lead * t1.min(t2))
}

/// Smallest `γ` admitted when `α, β < p`.
pub fn gamma_lower_threshold(params: &ParamSet) -> Result<f64> {
    require_window(params, GammaWindow::WindowIi)?;
    let (p, a, b, ps) = exps(params);
    let lead = ps * (ps - p) / p;
    let t1 = ((p - b) / (p - a)).powf((p - b) / p) / a;
    let t2 = ((p - a) / (p - b)).powf((p - a) / p) / b;
    Ok(lead * t1.max(t2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicSolution {
    pub k: f64,
    pub l: f64,
    pub residual_f1: f64,
    pub residual_f2: f64,
    /// Minimal `k` among all roots found.
    pub is_k0: bool,
    /// Minimal `ℓ` among all roots found.
    pub is_l1: bool,
    /// Whether `(k, ℓ) ∈ (0, 1]²`.
    pub in_unit_square: bool,
}

impl AlgebraicSolution {
    pub fn sum(&self) -> f64 {
        self.k + self.l
    }

    pub fn max_residual(&self) -> f64 {
        self.residual_f1.abs().max(self.residual_f2.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Uniform samples on `(0, 1]`.
    pub scan_n: usize,
    /// Extra geometric samples per decade next to `0` (down to `1e-300`)
    /// and next to `1` (down to a distance of `1e-14`).
    pub samples_per_decade: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            scan_n: DEFAULT_SCAN_N,
            samples_per_decade: 25,
        }
    }
}

fn scan_points(opts: &SolveOptions) -> Vec<f64> {
    let n = opts.scan_n.max(10);
    let mut pts: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
    let decades = (n as f64).log10().floor() as i32;
    let per = opts.samples_per_decade.max(1);
    // small-γ roots sit at ℓ ~ γ^{p/(p−β)}, far below the uniform spacing
    for j in 0..=(NEAR_ZERO_DECADES - decades).max(0) as usize * per {
        pts.push(10f64.powf(-(decades as f64) - j as f64 / per as f64));
    }
    for j in 0..=(NEAR_ONE_DECADES - decades).max(0) as usize * per {
        pts.push(1.0 - 10f64.powf(-(decades as f64) - j as f64 / per as f64));
    }
    pts.retain(|&k| k > 0.0 && k <= 1.0);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

/// 2x2 Jacobian of `(F1, F2)` in `(k, ℓ)`; rows are `F1`, `F2`.
pub fn jacobian(k: f64, l: f64, sys: &GammaSystem) -> [[f64; 2]; 2] {
    let (p, a, b, ps) = exps(sys.params());
    let q = sys.q();
    let g = sys.gamma;
    let ca = a * g / ps;
    let cb = b * g / ps;
    let d1k = q * k.powf(q - 1.0) + ca * (a - p) / p * k.powf((a - p) / p - 1.0) * l.powf(b / p);
    let d1l = ca * b / p * k.powf((a - p) / p) * l.powf(b / p - 1.0);
    let d2k = cb * a / p * l.powf((b - p) / p) * k.powf(a / p - 1.0);
    let d2l = q * l.powf(q - 1.0) + cb * (b - p) / p * l.powf((b - p) / p - 1.0) * k.powf(a / p);
    [[d1k, d1l], [d2k, d2l]]
}

fn solve2(m: [[f64; 2]; 2], rhs: [f64; 2]) -> Option<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
    if !det.is_finite() || det.abs() <= 1e-14 * scale * scale {
        return None;
    }
    Some([
        (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ])
}

/// Damped Newton on `(F1, F2)`; returns the point with the smallest
/// max-residual seen.
fn newton2(sys: &GammaSystem, mut k: f64, mut l: f64, max_iter: usize, tol: f64) -> (f64, f64) {
    let resid = |k: f64, l: f64| {
        sys.f1_unchecked(k, l)
            .abs()
            .max(sys.f2_unchecked(k, l).abs())
    };
    let mut r = resid(k, l);
    for _ in 0..max_iter {
        if r <= tol {
            break;
        }
        let f = [sys.f1_unchecked(k, l), sys.f2_unchecked(k, l)];
        let Some(d) = solve2(jacobian(k, l, sys), f) else {
            break;
        };
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-6 {
            let (nk, nl) = (k - t * d[0], l - t * d[1]);
            if nk > 0.0 && nl > 0.0 {
                let nr = resid(nk, nl);
                if nr < r {
                    k = nk;
                    l = nl;
                    r = nr;
                    improved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (k, l)
}

/// Roots along one parametrized curve: `F_other(k, curve(k))` sign changes.
fn scan_curve(sys: &GammaSystem, pts: &[f64], swap: bool) -> Vec<(f64, f64)> {
    let target = if swap { sys.swapped() } else { *sys };
    let phi = |k: f64| {
        let l = target.ell_of_k_unchecked(k);
        if l == 0.0 {
            // F2 at ℓ = 0 as a limit
            let (p, _, b, _) = exps(target.params());
            return if b < p {
                f64::INFINITY
            } else if b > p {
                -1.0
            } else {
                target.gamma * b / target.params.p_star() * k.powf(target.params.alpha() / p)
                    - 1.0
            };
        }
        target.f2_unchecked(k, l)
    };
    let values: Vec<f64> = pts.iter().map(|&k| phi(k)).collect();
    sign_change_brackets(&values)
        .into_iter()
        .map(|br| {
            let k = match br {
                Bracket::Exact(i) => pts[i],
                Bracket::Between(i) => {
                    let (a, b) = bisect(phi, pts[i], pts[i + 1], 1e-16);
                    0.5 * (a + b)
                }
            };
            let l = target.ell_of_k_unchecked(k);
            if swap {
                (l, k)
            } else {
                (k, l)
            }
        })
        .filter(|&(k, l)| k > 0.0 && l > 0.0)
        .collect()
}

/// Every root of the system reachable from the `(0, 1]` parametrizations.
pub fn solve_all(sys: &GammaSystem) -> Result<Vec<AlgebraicSolution>> {
    solve_all_with(sys, &SolveOptions::default())
}

pub fn solve_all_with(sys: &GammaSystem, opts: &SolveOptions) -> Result<Vec<AlgebraicSolution>> {
    let pts = scan_points(opts);
    let mut raw = scan_curve(sys, &pts, false);
    raw.extend(scan_curve(sys, &pts, true));

    let residual = |k: f64, l: f64| sys.f1_unchecked(k, l).abs().max(sys.f2_unchecked(k, l).abs());
    let mut found: Vec<(f64, f64)> = Vec::new();
    for (k, l) in raw {
        let (k, l) = newton2(sys, k, l, 50, 1e-15);
        let dup = found.iter_mut().find(|(k2, l2)| {
            (k - *k2).abs() <= 1e-8 * k.max(*k2) + DEDUP_ABS && (l - *l2).abs() <= 1e-8 * l.max(*l2) + DEDUP_ABS
        });
        match dup {
            // the curve parametrized by the smaller coordinate resolves it better
            Some(old) if residual(k, l) < residual(old.0, old.1) => *old = (k, l),
            Some(_) => {}
            None => found.push((k, l)),
        }
    }
    if found.is_empty() {
        return Err(Error::NoSolution(format!(
            "no sign change of F2(k, l(k)) or F1(k(l), l) on {} samples in (0, 1] for gamma = {}",
            pts.len(),
            sys.gamma
        )));
    }
    found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let k_min = found.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
    let l_min = found.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let mut out: Vec<AlgebraicSolution> = found
        .into_iter()
        .map(|(k, l)| AlgebraicSolution {
            k,
            l,
            residual_f1: sys.f1_unchecked(k, l),
            residual_f2: sys.f2_unchecked(k, l),
            is_k0: false,
            is_l1: false,
            in_unit_square: k <= 1.0 && l <= 1.0,
        })
        .collect();
    if let Some(s) = out.iter_mut().find(|s| s.k == k_min) {
        s.is_k0 = true;
    }
    if let Some(s) = out.iter_mut().find(|s| s.l == l_min) {
        s.is_l1 = true;
    }
    for s in &out {
        if !s.in_unit_square {
            log::warn!("root ({}, {}) lies outside (0, 1]^2", s.k, s.l);
        }
        if s.max_residual() >= ROOT_TOL {
            log::warn!(
                "root ({}, {}) has residual {:e} above {ROOT_TOL:e}",
                s.k,
                s.l,
                s.max_residual()
            );
        }
    }
    Ok(out)
}

/// `A = (s/N)(k₀ + ℓ₀) S^{N/(sp)}`.
pub fn least_energy(k0: f64, l0: f64, scalar_constant: f64, params: &ParamSet) -> f64 {
    let n = params.dim();
    let sp = params.s() * params.p();
    params.energy_factor() * (k0 + l0) * scalar_constant.powf(n / sp)
}

/// Companion profiles from the change of variables `y = c + d`, `x = c/d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompanionProfiles {
    pub f1: f64,
    pub f2: f64,
    pub g1: f64,
    pub g2: f64,
}

pub fn companion_profiles(x: f64, sys: &GammaSystem) -> Result<CompanionProfiles> {
    require_window(sys.params(), GammaWindow::WindowI)?;
    if !(x > 0.0) {
        return Err(Error::Domain(format!("x = {x} must be positive")));
    }
    let (p, a, b, ps) = exps(sys.params());
    let g = sys.gamma;
    let q = sys.q();
    let lead = ps * (ps - p);
    Ok(CompanionProfiles {
        f1: (x + 1.0).powf(q) / (x.powf(q) + a * g / ps * x.powf((a - p) / p)),
        f2: (x + 1.0).powf(q) / (1.0 + b * g / ps * x.powf(a / p)),
        g1: -lead / (a * g) * x.powf(b / p) + b * x - a + p,
        g2: lead / (b * g) + (b - p) * x.powf(a / p) - a * x.powf((a - p) / p),
    })
}

/// Maximizer of `g₁`: `(pαγ / (p*(p*−p)))^{p/(β−p)}`.
pub fn companion_x1(sys: &GammaSystem) -> f64 {
    let (p, a, b, ps) = exps(sys.params());
    (p * a * sys.gamma / (ps * (ps - p))).powf(p / (b - p))
}

/// Minimizer of `g₂`: `(α−p)/(β−p)`.
pub fn companion_x2(params: &ParamSet) -> f64 {
    (params.alpha() - params.p()) / (params.beta() - params.p())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub gamma: f64,
    pub k: f64,
    pub l: f64,
}

impl BranchPoint {
    pub fn sum(&self) -> f64 {
        self.k + self.l
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationFailure {
    pub last_good_gamma: f64,
    pub attempted_gamma: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    /// Last grid `γ` up to which `k + ℓ > 1` held at every point.
    pub gamma_1: Option<f64>,
    pub failure: Option<ContinuationFailure>,
}

const CORRECTOR_TOL: f64 = 1e-14;
const MIN_STEP: f64 = 1e-10;

/// Predictor–corrector continuation of the root through `(1, 1)` at `γ = 0`.
///
/// Each grid value is reached by tangent predictions and Newton corrections;
/// a failed correction halves the step, and a step below `1e-10` ends the
/// run with the points computed so far.
pub fn continue_branch(params: &ParamSet, gamma_grid: &[f64]) -> Result<Branch> {
    require_window(params, GammaWindow::WindowIi)?;
    if gamma_grid.is_empty() {
        return Err(Error::Precondition("empty gamma grid".into()));
    }
    if gamma_grid[0] <= 0.0 || gamma_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "gamma grid must be positive and strictly increasing".into(),
        ));
    }

    let (_, a, b, ps) = exps(params);
    let mut gamma = 0.0;
    let (mut k, mut l) = (1.0_f64, 1.0_f64);
    let mut points = Vec::with_capacity(gamma_grid.len());
    let mut failure = None;
    let mut step = gamma_grid[0];

    'grid: for &target in gamma_grid {
        while gamma < target {
            let dg = step.min(target - gamma);
            // tangent from F(k, l, γ) = 0: J dx/dγ = -∂F/∂γ
            let sys_now = GammaSystem { params: *params, gamma };
            let dfdg = [
                a / ps * k.powf((a - params.p()) / params.p()) * l.powf(b / params.p()),
                b / ps * l.powf((b - params.p()) / params.p()) * k.powf(a / params.p()),
            ];
            let tangent = solve2(jacobian(k, l, &sys_now), [-dfdg[0], -dfdg[1]]);
            let Some(t) = tangent else {
                failure = Some(ContinuationFailure {
                    last_good_gamma: gamma,
                    attempted_gamma: gamma + dg,
                    reason: "singular Jacobian".into(),
                });
                break 'grid;
            };
            let next = GammaSystem {
                params: *params,
                gamma: gamma + dg,
            };
            let (pk, pl) = (k + dg * t[0], l + dg * t[1]);
            let ok = pk > 0.0 && pl > 0.0 && pk.is_finite() && pl.is_finite();
            let corrected = ok.then(|| newton2(&next, pk, pl, 30, CORRECTOR_TOL));
            let accepted = corrected.filter(|&(ck, cl)| {
                next.f1_unchecked(ck, cl).abs().max(next.f2_unchecked(ck, cl).abs()) < ROOT_TOL
                    && (ck - k).abs() + (cl - l).abs() < 0.5 * (k + l)
            });
            match accepted {
                Some((ck, cl)) => {
                    k = ck;
                    l = cl;
                    gamma += dg;
                    step = (2.0 * dg).min(target);
                }
                None => {
                    step = 0.5 * dg;
                    if step < MIN_STEP {
                        failure = Some(ContinuationFailure {
                            last_good_gamma: gamma,
                            attempted_gamma: gamma + dg,
                            reason: "Newton corrector diverged".into(),
                        });
                        break 'grid;
                    }
                }
            }
        }
        points.push(BranchPoint { gamma, k, l });
    }

    let gamma_1 = points
        .iter()
        .take_while(|pt| pt.sum() > 1.0)
        .last()
        .map(|pt| pt.gamma);
    Ok(Branch {
        points,
        gamma_1,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn window_i() -> ParamSet {
        ParamSet::new(1, 0.5, 1.5, 3.0, 3.0).unwrap()
    }

    fn window_ii() -> ParamSet {
        ParamSet::from_alpha(1, 0.25, 1.8, 1.6).unwrap()
    }

    #[test]
    fn f_values_at_simple_points() {
        let sys = GammaSystem::new(window_ii(), 1e-12).unwrap();
        assert!(f1(1.0, 1.0, &sys).unwrap().abs() < 1e-11);
        assert!(f2(1.0, 1.0, &sys).unwrap().abs() < 1e-11);
        assert_eq!(f1(1.0, 0.0, &sys).unwrap(), 0.0);
        assert!(f1(0.0, 1.0, &sys).is_err());
        assert!(f2(1.0, 0.0, &sys).is_err());
        assert!(f1(1.0, -0.1, &sys).is_err());
    }

    #[test]
    fn symmetric_swap() {
        let ps = ParamSet::new(1, 0.25, 1.8, 1.6363636363636365, 1.6363636363636365);
        let ps = ps.unwrap_or_else(|_| {
            let star = crate::exponents::critical_exponent(1, 0.25, 1.8).unwrap();
            ParamSet::new(1, 0.25, 1.8, star / 2.0, star / 2.0).unwrap()
        });
        let sys = GammaSystem::new(ps, 0.7).unwrap();
        let (k, l) = (0.3, 0.8);
        assert_eq!(
            f1(k, l, &sys).unwrap(),
            f2(l, k, &sys).unwrap()
        );
        for k in [0.1, 0.5, 0.9] {
            assert_eq!(ell_of_k(k, &sys).unwrap(), k_of_ell(k, &sys).unwrap());
        }
    }

    #[test]
    fn ell_of_k_substitution() {
        let sys = GammaSystem::new(window_ii(), 2.0).unwrap();
        assert_eq!(ell_of_k(1.0, &sys).unwrap(), 0.0);
        for i in 1..100 {
            let k = i as f64 / 100.0;
            let l = ell_of_k(k, &sys).unwrap();
            assert!(f1(k, l, &sys).unwrap().abs() < 1e-10);
        }
        assert!(ell_of_k(0.0, &sys).is_err());
        assert!(ell_of_k(1.5, &sys).is_err());
    }

    #[test]
    fn ell_prime_matches_finite_difference() {
        let sys = GammaSystem::new(window_ii(), 3.0).unwrap();
        for k in [0.05, 0.3, 0.6, 0.95] {
            let h = 1e-6 * k;
            let fd = (ell_of_k(k + h, &sys).unwrap() - ell_of_k(k - h, &sys).unwrap()) / (2.0 * h);
            assert_relative_eq!(ell_prime(k, &sys).unwrap(), fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn upper_threshold_examples() {
        // p* = 6: 6 * 4.5 / (1.5 * 3)
        assert_relative_eq!(gamma_upper_threshold(&window_i()).unwrap(), 6.0, max_relative = 1e-14);
        let ps = ParamSet::from_alpha(1, 0.5, 1.5, 2.5).unwrap();
        let sw = ps.swapped();
        assert_relative_eq!(
            gamma_upper_threshold(&ps).unwrap(),
            gamma_upper_threshold(&sw).unwrap(),
            max_relative = 1e-14
        );
        assert!(matches!(
            gamma_upper_threshold(&window_ii()),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn lower_threshold_examples() {
        let ps = window_ii();
        let t = gamma_lower_threshold(&ps).unwrap();
        assert!(t > 0.0 && t.is_finite());
        assert_relative_eq!(
            t,
            gamma_lower_threshold(&ps.swapped()).unwrap(),
            max_relative = 1e-14
        );
        let star = ps.p_star();
        let sym = ParamSet::new(1, 0.25, 1.8, star / 2.0, star / 2.0).unwrap();
        let p = sym.p();
        assert_relative_eq!(
            gamma_lower_threshold(&sym).unwrap(),
            star * (star - p) / (p * sym.alpha()),
            max_relative = 1e-14
        );
        assert!(gamma_lower_threshold(&window_i()).is_err());
    }

    #[test]
    fn jacobian_at_trivial_point() {
        let ps = window_ii();
        let sys = GammaSystem::new(ps, 1e-300).unwrap();
        let j = jacobian(1.0, 1.0, &sys);
        let q = (ps.p_star() - ps.p()) / ps.p();
        assert!((j[0][0] - q).abs() < 1e-10);
        assert!((j[1][1] - q).abs() < 1e-10);
        assert!(j[0][1].abs() < 1e-10 && j[1][0].abs() < 1e-10);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let sys = GammaSystem::new(window_ii(), 1.3).unwrap();
        let (k, l) = (0.4, 0.7);
        let j = jacobian(k, l, &sys);
        let h = 1e-6;
        let fd = [
            [
                (f1(k + h, l, &sys).unwrap() - f1(k - h, l, &sys).unwrap()) / (2.0 * h),
                (f1(k, l + h, &sys).unwrap() - f1(k, l - h, &sys).unwrap()) / (2.0 * h),
            ],
            [
                (f2(k + h, l, &sys).unwrap() - f2(k - h, l, &sys).unwrap()) / (2.0 * h),
                (f2(k, l + h, &sys).unwrap() - f2(k, l - h, &sys).unwrap()) / (2.0 * h),
            ],
        ];
        for r in 0..2 {
            for c in 0..2 {
                assert_relative_eq!(j[r][c], fd[r][c], max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn solve_all_window_i_small_gamma_single_root_near_one() {
        let sys = GammaSystem::new(window_i(), 1e-6).unwrap();
        let sols = solve_all(&sys).unwrap();
        assert_eq!(sols.len(), 1);
        assert!((sols[0].k - 1.0).abs() < 1e-4 && (sols[0].l - 1.0).abs() < 1e-4);
        assert!(sols[0].is_k0 && sols[0].is_l1);
        assert!(sols[0].max_residual() < ROOT_TOL);
    }

    #[test]
    fn solve_all_symmetric_has_diagonal_root() {
        let sys = GammaSystem::new(window_i(), 3.0).unwrap();
        let sols = solve_all(&sys).unwrap();
        assert!(sols.iter().any(|s| (s.k - s.l).abs() < 1e-9));
        for s in &sols {
            assert!(s.max_residual() < ROOT_TOL);
        }
    }

    #[test]
    fn solve_all_window_ii_above_threshold() {
        let ps = window_ii();
        let gamma = 2.0 * gamma_lower_threshold(&ps).unwrap();
        let sols = solve_all(&GammaSystem::new(ps, gamma).unwrap()).unwrap();
        let k0 = sols.iter().find(|s| s.is_k0).unwrap();
        assert!(k0.sum() < 1.0, "{sols:?}");
        assert_eq!(sols.iter().filter(|s| s.is_k0).count(), 1);
    }

    #[test]
    fn least_energy_examples() {
        let ps = ParamSet::from_alpha(1, 0.25, 1.8, 1.5).unwrap();
        assert_relative_eq!(least_energy(1.0, 1.0, 1.0, &ps), 2.0 * 0.25, max_relative = 1e-15);
        let e = 1.0 / (0.25 * 1.8);
        assert_relative_eq!(
            least_energy(0.3, 0.4, 2.0, &ps),
            least_energy(0.3, 0.4, 1.0, &ps) * 2f64.powf(e),
            max_relative = 1e-14
        );
    }

    #[test]
    fn companion_critical_points() {
        let ps = ParamSet::from_alpha(1, 0.5, 1.5, 2.5).unwrap();
        let gamma = 0.5 * gamma_upper_threshold(&ps).unwrap();
        let sys = GammaSystem::new(ps, gamma).unwrap();
        let x2 = companion_x2(&ps);
        assert_relative_eq!(x2, (2.5 - 1.5) / (3.5 - 1.5));
        assert_eq!(companion_x2(&window_i()), 1.0);
        let x1 = companion_x1(&sys);
        let g1_max = companion_profiles(x1, &sys).unwrap().g1;
        assert!(g1_max <= 0.0);
        for x in [0.1, 0.5, 2.0, 10.0] {
            assert!(companion_profiles(x, &sys).unwrap().g1 <= g1_max + 1e-12);
            assert!(companion_profiles(x, &sys).unwrap().g2 >= -1e-12);
        }
        assert!(companion_profiles(1.0, &GammaSystem::new(window_ii(), 1.0).unwrap()).is_err());
    }

    #[test]
    fn branch_from_tiny_gamma() {
        let b = continue_branch(&window_ii(), &[1e-6]).unwrap();
        let pt = b.points[0];
        assert!((pt.k - 1.0).abs() < 1e-4 && (pt.l - 1.0).abs() < 1e-4);
        assert!((pt.sum() - 2.0).abs() < 1e-4);
        assert!(b.failure.is_none());
        assert!(continue_branch(&window_ii(), &[]).is_err());
        assert!(continue_branch(&window_i(), &[0.1]).is_err());
    }

    #[test]
    fn small_gamma_roots_near_the_axes_are_resolved_once() {
        // near-semitrivial roots sit at k or l around 1e-16
        let ps = ParamSet::new(3, 0.8035605920113416, 1.3323164852285092, 1.0406344477147065, 1.0309646451704202)
            .unwrap();
        let sols = solve_all(&GammaSystem::new(ps, 1e-3).unwrap()).unwrap();
        assert_eq!(sols.len(), 3, "{sols:?}");
        for s in &sols {
            assert!(s.max_residual() < ROOT_TOL, "{s:?}");
        }
        assert!(sols[0].k < 1e-14 && sols[2].l < 1e-14);
    }
}
