//! Parameter tuples `(N, s, p, α, β)` and the regimes they fall into.
//!
//! Every other module is parameterized by a [`ParamSet`]. A tuple is
//! admissible when `0 < s < 1`, `p > 1`, `N > s p`, `α, β > 1` and
//! `α + β = p*_s = N p / (N - s p)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Absolute tolerance on `α + β = p*_s`.
pub const SUM_TOL: f64 = 1e-9;

/// Absolute tolerance used when comparing `α` or `β` against `p`.
///
/// Exact equalities such as `β = p` are part of the case analysis, and a
/// tuple built as `β = p*_s - α` can only hit them up to rounding.
pub const EQ_TOL: f64 = 1e-9;

/// `p*_s = N p / (N - s p)`.
pub fn critical_exponent(n: u32, s: f64, p: f64) -> Result<f64> {
    let n = f64::from(n);
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("s = {s} is not in (0, 1)")));
    }
    if !(p > 1.0) {
        return Err(Error::Domain(format!("p = {p} is not > 1")));
    }
    let denom = n - s * p;
    if !(denom > 0.0) {
        return Err(Error::Domain(format!(
            "N - s*p = {denom} is not positive; p*_s is undefined"
        )));
    }
    Ok(n * p / denom)
}

/// A validated exponent tuple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    n: u32,
    s: f64,
    p: f64,
    alpha: f64,
    beta: f64,
    p_star: f64,
}

impl ParamSet {
    /// Validates an explicit `(N, s, p, α, β)` tuple.
    pub fn new(n: u32, s: f64, p: f64, alpha: f64, beta: f64) -> Result<Self> {
        validate_params([f64::from(n), s, p, alpha, beta])
    }

    /// Builds the tuple from `α` alone, with `β = p*_s - α` exactly.
    pub fn from_alpha(n: u32, s: f64, p: f64, alpha: f64) -> Result<Self> {
        let p_star = critical_exponent(n, s, p).map_err(|_| {
            let mut v = check_scalar_part(f64::from(n), s, p);
            if v.is_empty() {
                v.push(Violation::SobolevCondition {
                    n: f64::from(n),
                    sp: s * p,
                });
            }
            Error::InvalidParams(v)
        })?;
        validate_params([f64::from(n), s, p, alpha, p_star - alpha])
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> f64 {
        f64::from(self.n)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn p_star(&self) -> f64 {
        self.p_star
    }

    /// `s / N`, which equals `1/p - 1/p*_s`.
    pub fn energy_factor(&self) -> f64 {
        self.s / self.dim()
    }

    /// The same tuple with the roles of `α` and `β` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
            ..*self
        }
    }

    /// `(N, s, p, α, β)` as a raw tuple.
    pub fn to_raw(&self) -> [f64; 5] {
        [self.dim(), self.s, self.p, self.alpha, self.beta]
    }
}

fn check_scalar_part(n: f64, s: f64, p: f64) -> Vec<Violation> {
    let mut v = Vec::new();
    if !(n.is_finite() && n >= 1.0 && n.fract() == 0.0 && n <= f64::from(u32::MAX)) {
        v.push(Violation::DimensionNotPositiveInteger(n));
    }
    if !(s > 0.0 && s < 1.0) {
        v.push(Violation::FractionalOrderOutOfRange(s));
    }
    if !(p > 1.0 && p.is_finite()) {
        v.push(Violation::ExponentNotAboveOne(p));
    }
    if !(n > s * p) {
        v.push(Violation::SobolevCondition { n, sp: s * p });
    }
    v
}

/// Checks every admissibility constraint and reports all violations at once.
pub fn validate_params(raw: [f64; 5]) -> Result<ParamSet> {
    let [n, s, p, alpha, beta] = raw;
    let names = ["N", "s", "p", "alpha", "beta"];
    let mut violations: Vec<Violation> = raw
        .iter()
        .zip(names)
        .filter(|(x, _)| !x.is_finite())
        .map(|(_, name)| Violation::NotFinite(name))
        .collect();
    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations));
    }

    violations.extend(check_scalar_part(n, s, p));
    if !(alpha > 1.0) {
        violations.push(Violation::AlphaNotAboveOne(alpha));
    }
    if !(beta > 1.0) {
        violations.push(Violation::BetaNotAboveOne(beta));
    }
    let scalar_ok = !violations.iter().any(|v| {
        matches!(
            v,
            Violation::DimensionNotPositiveInteger(_)
                | Violation::FractionalOrderOutOfRange(_)
                | Violation::ExponentNotAboveOne(_)
                | Violation::SobolevCondition { .. }
        )
    });
    let p_star = n * p / (n - s * p);
    if scalar_ok && (alpha + beta - p_star).abs() > SUM_TOL {
        violations.push(Violation::CriticalSum {
            sum: alpha + beta,
            p_star,
        });
    }
    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations));
    }
    Ok(ParamSet {
        n: n as u32,
        s,
        p,
        alpha,
        beta,
        p_star,
    })
}

/// Which hypothesis of the classification a tuple satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TauCase {
    /// `1 < β < p`.
    CaseIBetaLtP,
    /// `β = p` and `α < p`.
    CaseIiBetaEqPAlphaLtP,
    /// `β > p` and `α < p`.
    CaseIiiBetaGtPAlphaLtP,
    /// None of the above: the minimum of `h` sits at `τ = 0`.
    DegenerateTauMinZero,
}

/// The parameter windows for the least-energy formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GammaWindow {
    /// `N/(2s) < p < N/s` and `α, β > p`.
    WindowI,
    /// `2N/(N+2s) < p < N/(2s)` and `α, β < p`.
    WindowIi,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Regime {
    pub tau_case: TauCase,
    pub window: GammaWindow,
}

/// Three-way comparison of `x` against `p` with [`EQ_TOL`].
pub(crate) fn cmp_to_p(x: f64, p: f64) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    if (x - p).abs() <= EQ_TOL {
        Ordering::Equal
    } else if x < p {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

pub fn regime_classify(params: &ParamSet) -> Regime {
    use std::cmp::Ordering::*;
    let p = params.p;
    let tau_case = match (cmp_to_p(params.alpha, p), cmp_to_p(params.beta, p)) {
        (_, Less) => TauCase::CaseIBetaLtP,
        (Less, Equal) => TauCase::CaseIiBetaEqPAlphaLtP,
        (Less, Greater) => TauCase::CaseIiiBetaGtPAlphaLtP,
        _ => TauCase::DegenerateTauMinZero,
    };

    let n = params.dim();
    let s = params.s;
    let strictly_above = |x: f64| cmp_to_p(x, p) == Greater;
    let strictly_below = |x: f64| cmp_to_p(x, p) == Less;
    let window = if n / (2.0 * s) < p
        && p < n / s
        && strictly_above(params.alpha)
        && strictly_above(params.beta)
    {
        GammaWindow::WindowI
    } else if 2.0 * n / (n + 2.0 * s) < p
        && p < n / (2.0 * s)
        && strictly_below(params.alpha)
        && strictly_below(params.beta)
    {
        GammaWindow::WindowIi
    } else {
        GammaWindow::Neither
    };

    Regime {
        tau_case,
        window,
    }
}
