//! Property suites for every layer, runnable as one registry.
//!
//! Each check draws its inputs from a seeded generator, so a run is
//! reproducible from [`VerifyConfig::seed`].

use std::io::Read;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebraic::{self, GammaSystem};
use crate::coupling::{self, CouplingCase};
use crate::error::{Error, Result};
use crate::exponents::{critical_exponent, regime_classify, validate_params, GammaWindow, ParamSet};
use crate::gagliardo::{self, DiscreteFunction, Grid1D, OptimizerOptions};
use crate::roots::log_grid;

/// Built-in golden exponents as `N,s,p,p_star` rows.
pub const DEFAULT_GOLDEN: &str = "N,s,p,p_star
4,0.5,2,2.6666666666666665
1,0.5,1.5,6
2,0.5,1.5,2.4
";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoldenRow {
    #[serde(rename = "N")]
    pub n: u32,
    pub s: f64,
    pub p: f64,
    pub p_star: f64,
}

pub fn parse_golden<R: Read>(input: R) -> Result<Vec<GoldenRow>> {
    let mut rows = Vec::new();
    for rec in csv::Reader::from_reader(input).deserialize() {
        rows.push(rec?);
    }
    if rows.is_empty() {
        return Err(Error::Precondition("golden table is empty".into()));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Number of random tuples in the classification sweeps.
    pub sweep: usize,
    pub golden: Vec<GoldenRow>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            sweep: 500,
            golden: parse_golden(DEFAULT_GOLDEN.as_bytes()).expect("built-in table parses"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub module: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub checks: Vec<CheckReport>,
}

impl VerifySummary {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

type CheckFn = fn(&VerifyConfig, &mut ChaCha8Rng) -> std::result::Result<String, String>;

/// A registered property check.
#[derive(Clone, Copy)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    run: CheckFn,
}

impl Check {
    pub fn id(&self) -> String {
        format!("{}.{}", self.module, self.name)
    }
}

pub fn registry() -> Vec<Check> {
    macro_rules! c {
        ($m:literal, $n:ident) => {
            Check {
                module: $m,
                name: stringify!($n),
                run: $n,
            }
        };
    }
    vec![
        c!("exponents", golden_exponents),
        c!("exponents", reciprocal_identity),
        c!("exponents", validation_examples),
        c!("exponents", window_inequalities),
        c!("coupling", derivative_factorization),
        c!("coupling", roots_change_sign),
        c!("coupling", case_root_counts),
        c!("coupling", classification_consistency),
        c!("coupling", monotone_g_both_above),
        c!("coupling", synchronized_relations),
        c!("algebraic", swap_symmetry),
        c!("algebraic", substitution_identities),
        c!("algebraic", root_residuals),
        c!("algebraic", sum_lower_bound_window_i),
        c!("algebraic", uniqueness_window_ii),
        c!("algebraic", slope_bound_window_ii),
        c!("algebraic", ordering_below_k0),
        c!("algebraic", branch_matches_roots),
        c!("algebraic", trivial_jacobian),
        c!("gagliardo", homogeneity),
        c!("gagliardo", euler_identity),
        c!("gagliardo", gradient_check),
        c!("gagliardo", proportional_pair_identity),
        c!("gagliardo", nehari_energy),
        c!("gagliardo", scaled_pair_minimum),
        c!("gagliardo", mask_monotonicity),
        c!("gagliardo", synchronized_residual),
        c!("gagliardo", refinement),
        c!("gagliardo", extremal_family_bound),
    ]
}

/// Runs every check whose module or full id matches `filter`.
pub fn run(cfg: &VerifyConfig, filter: Option<&str>) -> Result<VerifySummary> {
    // seeds follow the registry position, so a filtered run repeats the full one
    let selected: Vec<(usize, Check)> = registry()
        .into_iter()
        .enumerate()
        .filter(|(_, c)| filter.is_none_or(|f| c.module == f || c.id() == f || c.id().starts_with(f)))
        .collect();
    if selected.is_empty() {
        return Err(Error::Precondition(format!(
            "filter {:?} matches no check",
            filter.unwrap_or("")
        )));
    }
    let mut checks = Vec::with_capacity(selected.len());
    for (i, c) in &selected {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(*i as u64 * 0x9E37));
        let t0 = Instant::now();
        let out = (c.run)(cfg, &mut rng);
        let seconds = t0.elapsed().as_secs_f64();
        let (passed, detail) = match out {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        log::info!("{} {}: {detail}", if passed { "PASS" } else { "FAIL" }, c.id());
        checks.push(CheckReport {
            name: c.id(),
            module: c.module.to_string(),
            passed,
            detail,
            seconds,
        });
    }
    Ok(VerifySummary { checks })
}

// ---------------------------------------------------------------------------
// samplers

const MARGIN: f64 = 0.05;

/// Least distance of `α` and `β` from `p` unless they are meant to equal it.
/// Closer tuples push roots of `g` toward `0` or `∞` and flatten `h`.
const GAP: f64 = 0.2;

fn off_p(x: f64, p: f64) -> bool {
    x == p || (x - p).abs() >= GAP
}

fn interior(rng: &mut impl Rng, lo: f64, hi: f64) -> Option<f64> {
    let w = hi - lo;
    (w > 1e-3).then(|| rng.gen_range(lo + MARGIN * w..hi - MARGIN * w))
}

fn base_triple(rng: &mut impl Rng) -> (u32, f64, f64) {
    let n = rng.gen_range(1..=4u32);
    let s = rng.gen_range(0.1..0.9);
    let p_hi = (0.9 * n as f64 / s).min(5.0);
    let p = rng.gen_range(1.05..p_hi.max(1.1));
    (n, s, p)
}

/// A random admissible tuple in the given case, kept away from the case
/// boundaries.
pub fn sample_case(case: CouplingCase, rng: &mut impl Rng) -> ParamSet {
    for _ in 0..100_000 {
        let (n, s, p) = base_triple(rng);
        if n as f64 <= s * p * 1.05 {
            continue;
        }
        let ps = n as f64 * p / (n as f64 - s * p);
        let alpha = match case {
            CouplingCase::One => interior(rng, (ps - p).max(1.0), ps - 1.0),
            CouplingCase::TwoI => {
                let p = rng.gen_range((0.5 * n as f64).max(1.0) * 1.05 + 0.01..n as f64 + 2.0);
                let s = n as f64 / (2.0 * p);
                match ParamSet::new(n, s, p, p, p) {
                    Ok(ps) if CouplingCase::of(&ps) == case => return ps,
                    _ => continue,
                }
            }
            CouplingCase::TwoIi => {
                let a = ps - p;
                (a > 1.0 + MARGIN && a < p * (1.0 - MARGIN)).then_some(a)
            }
            CouplingCase::TwoIii => {
                let a = ps - p;
                (a > p * (1.0 + MARGIN)).then_some(a)
            }
            CouplingCase::ThreeI => interior(rng, p, ps - p),
            CouplingCase::ThreeIi => interior(rng, 1.0, p.min(ps - p)),
            CouplingCase::ThreeIii => (ps - p > p * (1.0 + MARGIN)).then_some(p),
        };
        let Some(alpha) = alpha else { continue };
        let Ok(params) = ParamSet::from_alpha(n, s, p, alpha) else {
            continue;
        };
        if !(off_p(params.alpha(), p) && off_p(params.beta(), p)) {
            continue;
        }
        if CouplingCase::of(&params) == case {
            return params;
        }
    }
    unreachable!("every case has a sizeable admissible region")
}

/// A random admissible tuple with the case drawn uniformly.
pub fn sample_admissible(rng: &mut impl Rng) -> ParamSet {
    let case = CouplingCase::ALL[rng.gen_range(0..CouplingCase::ALL.len())];
    sample_case(case, rng)
}

/// A random tuple in the requested window.
pub fn sample_window(window: GammaWindow, rng: &mut impl Rng) -> ParamSet {
    for _ in 0..100_000 {
        let n = rng.gen_range(1..=4u32);
        let s = rng.gen_range(0.1..0.9);
        let nf = n as f64;
        let (lo, hi) = match window {
            GammaWindow::WindowI => (nf / (2.0 * s), nf / s),
            GammaWindow::WindowIi => (2.0 * nf / (nf + 2.0 * s), nf / (2.0 * s)),
            GammaWindow::Neither => (1.0, nf / s),
        };
        let Some(p) = interior(rng, lo.max(1.0), hi.min(6.0)) else {
            continue;
        };
        let Ok(ps) = critical_exponent(n, s, p) else {
            continue;
        };
        let alpha = match window {
            GammaWindow::WindowI => interior(rng, p, ps - p),
            GammaWindow::WindowIi => interior(rng, (ps - p).max(1.0), p.min(ps - 1.0)),
            GammaWindow::Neither => interior(rng, 1.0, ps - 1.0),
        };
        let Some(alpha) = alpha else { continue };
        if let Ok(params) = ParamSet::from_alpha(n, s, p, alpha) {
            if regime_classify(&params).window == window {
                return params;
            }
        }
    }
    unreachable!("both windows are nonempty")
}

fn fail(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// exponents

fn golden_exponents(cfg: &VerifyConfig, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for row in &cfg.golden {
        let got = critical_exponent(row.n, row.s, row.p).map_err(|e| e.to_string())?;
        fail((got - row.p_star).abs() <= 1e-12 * row.p_star.abs().max(1.0), || {
            format!(
                "p* for (N, s, p) = ({}, {}, {}) is {got}, golden value {}",
                row.n, row.s, row.p, row.p_star
            )
        })?;
    }
    Ok(format!("{} golden rows match", cfg.golden.len()))
}

fn reciprocal_identity(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.sweep {
        let ps = sample_admissible(rng);
        let err = (1.0 / ps.p() - 1.0 / ps.p_star() - ps.s() / ps.dim()).abs();
        worst = worst.max(err);
        fail(err < 1e-14, || format!("1/p - 1/p* - s/N = {err:e} at {:?}", ps.to_raw()))?;
        fail((ps.alpha() + ps.beta() - ps.p_star()).abs() <= 1e-12, || {
            format!("alpha + beta != p* at {:?}", ps.to_raw())
        })?;
    }
    Ok(format!("worst deviation {worst:e}"))
}

fn validation_examples(_: &VerifyConfig, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let ok = validate_params([4.0, 0.5, 2.0, 4.0 / 3.0, 4.0 / 3.0]).map_err(|e| e.to_string())?;
    fail((ok.p_star() - 8.0 / 3.0).abs() < 1e-15, || "p* of (4, 0.5, 2) is not 8/3".into())?;
    for bad in [[4.0, 0.5, 2.0, 2.0, 2.0], [1.0, 0.9, 2.0, 2.0, 2.0], [1.0, 1.2, 0.5, 0.5, 0.5]] {
        fail(validate_params(bad).is_err(), || format!("{bad:?} was accepted"))?;
    }
    match validate_params([1.0, 1.2, 0.5, 0.5, 0.5]) {
        Err(Error::InvalidParams(v)) => fail(v.len() >= 4, || {
            format!("only {} violations reported", v.len())
        })?,
        other => return Err(format!("unexpected {other:?}")),
    }
    Ok("accepts and rejects as expected".into())
}

fn window_inequalities(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut counts = [0usize; 3];
    for _ in 0..cfg.sweep {
        let ps = sample_admissible(rng);
        let (n, s, p, a, b) = (ps.dim(), ps.s(), ps.p(), ps.alpha(), ps.beta());
        match regime_classify(&ps).window {
            GammaWindow::WindowI => {
                counts[0] += 1;
                fail(n / (2.0 * s) < p && p < n / s && a > p && b > p, || {
                    format!("window i misassigned at {:?}", ps.to_raw())
                })?
            }
            GammaWindow::WindowIi => {
                counts[1] += 1;
                fail(
                    2.0 * n / (n + 2.0 * s) < p && p < n / (2.0 * s) && a < p && b < p,
                    || format!("window ii misassigned at {:?}", ps.to_raw()),
                )?
            }
            GammaWindow::Neither => counts[2] += 1,
        }
    }
    Ok(format!("window i/ii/neither: {counts:?}"))
}

// ---------------------------------------------------------------------------
// coupling

fn derivative_factorization(_: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut worst: f64 = 0.0;
    let taus = log_grid(1e-3, 1e3, 100);
    for _ in 0..50 {
        let ps = sample_admissible(rng);
        for &t in &taus {
            let h = 1e-6 * t;
            let fd = (coupling::h_eval(t + h, &ps) - coupling::h_eval(t - h, &ps)) / (2.0 * h);
            let an = coupling::h_prime(t, &ps);
            let err = (an - fd).abs() / an.abs().max(1.0);
            worst = worst.max(err);
            fail(err < 1e-6, || {
                format!("h' = {an:e} vs difference quotient {fd:e} at tau = {t} for {:?}", ps.to_raw())
            })?;
        }
    }
    Ok(format!("worst scaled error {worst:e}"))
}

fn roots_change_sign(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut total = 0;
    for _ in 0..cfg.sweep / 5 {
        let ps = sample_admissible(rng);
        for r in coupling::classify(&ps).g_roots {
            total += 1;
            let w = 1e-10 * r;
            let (lo, hi) = (coupling::g_eval(r - w, &ps), coupling::g_eval(r + w, &ps));
            fail(lo * hi <= 0.0, || {
                format!("g keeps its sign around root {r} for {:?}", ps.to_raw())
            })?;
        }
    }
    Ok(format!("{total} roots bracketed"))
}

fn case_root_counts(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut seen = std::collections::BTreeMap::new();
    for _ in 0..cfg.sweep {
        let ps = sample_admissible(rng);
        let c = coupling::classify(&ps);
        *seen.entry(c.case_label.label()).or_insert(0usize) += 1;
        fail(c.root_count_consistent, || {
            format!(
                "case {} with {} roots {:?} at {:?}",
                c.case_label,
                c.g_roots.len(),
                c.g_roots,
                ps.to_raw()
            )
        })?;
    }
    Ok(format!("per-case counts {seen:?}"))
}

fn classification_consistency(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for _ in 0..cfg.sweep {
        let ps = sample_admissible(rng);
        let c = coupling::classify(&ps);
        let positive = c.tau_min > 0.0;
        fail(positive == c.case_label.tau_min_positive(), || {
            format!("case {} but tau_min = {} at {:?}", c.case_label, c.tau_min, ps.to_raw())
        })?;
        if positive {
            fail(c.h_at_tau_min < 1.0, || {
                format!("h(tau_min) = {} not below 1 at {:?}", c.h_at_tau_min, ps.to_raw())
            })?;
        } else {
            let grid = log_grid(1e-8, coupling::default_tau_max(&ps), 2000);
            let min = grid.iter().map(|&t| coupling::h_eval(t, &ps)).fold(f64::INFINITY, f64::min);
            fail(min >= 1.0 - 1e-9, || {
                format!("sampled h dips to {min} although tau_min = 0 at {:?}", ps.to_raw())
            })?;
        }
    }
    Ok(format!("{} tuples consistent", cfg.sweep))
}

fn monotone_g_both_above(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for _ in 0..cfg.sweep / 10 {
        let ps = sample_case(CouplingCase::ThreeI, rng);
        // the claims are stated for the orientation α ≥ β
        let ps = if ps.alpha() >= ps.beta() { ps } else { ps.swapped() };
        for t in log_grid(1e-6, 1.0 - 1e-9, 200) {
            let g = coupling::g_eval(t, &ps);
            fail(g > 0.0, || format!("g({t}) = {g} at {:?}", ps.to_raw()))?;
        }
        let big = log_grid(1.0, 1e3, 400);
        for w in big.windows(2) {
            let (a, b) = (coupling::g_eval(w[0], &ps), coupling::g_eval(w[1], &ps));
            fail(b < a, || format!("g not decreasing near {} at {:?}", w[0], ps.to_raw()))?;
        }
    }
    Ok("g positive on (0, 1) and decreasing beyond 1".into())
}

fn synchronized_relations(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for _ in 0..cfg.sweep {
        let ps = sample_admissible(rng);
        let c = coupling::classify(&ps);
        if c.tau_min == 0.0 {
            fail(coupling::verify_sync_relations(&c, &ps).is_err(), || {
                "tau_min = 0 accepted".into()
            })?;
            continue;
        }
        n += 1;
        let r = coupling::verify_sync_relations(&c, &ps).map_err(|e| e.to_string())?;
        worst = worst.max(r.first).max(r.second);
        r.check(1e-9).map_err(|e| format!("{e} at {:?}", ps.to_raw()))?;
    }
    Ok(format!("{n} tuples, worst residual {worst:e}"))
}

// ---------------------------------------------------------------------------
// algebraic

fn random_system(window: GammaWindow, rng: &mut ChaCha8Rng) -> std::result::Result<GammaSystem, String> {
    let ps = sample_window(window, rng);
    let gamma = match window {
        GammaWindow::WindowI => 0.5 * algebraic::gamma_upper_threshold(&ps).map_err(|e| e.to_string())?,
        _ => 2.0 * algebraic::gamma_lower_threshold(&ps).map_err(|e| e.to_string())?,
    };
    GammaSystem::new(ps, gamma).map_err(|e| e.to_string())
}

fn solve(sys: &GammaSystem) -> std::result::Result<Vec<algebraic::AlgebraicSolution>, String> {
    algebraic::solve_all(sys).map_err(|e| format!("{e} at {:?}", sys.params().to_raw()))
}

fn k0_l0(sols: &[algebraic::AlgebraicSolution]) -> (f64, f64) {
    let s = sols.iter().find(|s| s.is_k0).expect("one root carries the k0 flag");
    (s.k, s.l)
}

fn swap_symmetry(_: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for _ in 0..200 {
        let ps = sample_admissible(rng);
        let sys = GammaSystem::new(ps, rng.gen_range(0.01..10.0)).map_err(|e| e.to_string())?;
        let sw = sys.swapped();
        let (k, l) = (rng.gen_range(0.01..2.0), rng.gen_range(0.01..2.0));
        let a = algebraic::f1(k, l, &sys).map_err(|e| e.to_string())?;
        let b = algebraic::f2(l, k, &sw).map_err(|e| e.to_string())?;
        fail(a == b, || format!("F1 = {a}, swapped F2 = {b} at {:?}", ps.to_raw()))?;
    }
    Ok("200 exact matches".into())
}

fn substitution_identities(_: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let ps = sample_admissible(rng);
        let sys = GammaSystem::new(ps, rng.gen_range(0.01..10.0)).map_err(|e| e.to_string())?;
        for i in 1..=200 {
            let k = i as f64 / 200.0;
            let l = algebraic::ell_of_k(k, &sys).map_err(|e| e.to_string())?;
            let r1 = algebraic::f1(k, l, &sys).map_err(|e| e.to_string())?.abs();
            let kk = algebraic::k_of_ell(k, &sys).map_err(|e| e.to_string())?;
            let r2 = if kk > 0.0 {
                algebraic::f2(kk, k, &sys).map_err(|e| e.to_string())?.abs()
            } else {
                0.0
            };
            worst = worst.max(r1).max(r2);
            fail(r1 < 1e-10 && r2 < 1e-10, || {
                format!("residuals {r1:e}, {r2:e} at k = {k} for {:?}", ps.to_raw())
            })?;
        }
    }
    Ok(format!("worst residual {worst:e}"))
}

fn root_residuals(_: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut count = 0;
    {
        for _ in 0..20 {
            let sys = random_system(GammaWindow::WindowIi, rng)?;
            for s in solve(&sys)? {
                count += 1;
                fail(s.max_residual() < 1e-10, || {
                    format!("root ({}, {}) residual {:e} at {:?}", s.k, s.l, s.max_residual(), sys.params().to_raw())
                })?;
            }
        }
    }
    Ok(format!("{count} roots below 1e-10"))
}

/// Samples `(c, d)` with both equations nonnegative and checks `c + d`
/// never drops below `k₀ + ℓ₀`.
fn sum_bound(sys: &GammaSystem, k0: f64, l0: f64, samples: usize, rng: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let target = k0 + l0;
    let mut admissible = 0;
    for i in 0..samples {
        // half uniform in a box, half on lines just below the critical sum
        let (c, d) = if i % 2 == 0 {
            (rng.gen_range(1e-6..1.5), rng.gen_range(1e-6..1.5))
        } else {
            let sum = target * rng.gen_range(0.9..1.0);
            let c = rng.gen_range(1e-6..sum);
            (c, sum - c)
        };
        if d <= 0.0 {
            continue;
        }
        let f1 = algebraic::f1(c, d, sys).map_err(|e| e.to_string())?;
        let f2 = algebraic::f2(c, d, sys).map_err(|e| e.to_string())?;
        if f1 >= 0.0 && f2 >= 0.0 {
            admissible += 1;
            fail(c + d >= target - 1e-9, || {
                format!("(c, d) = ({c}, {d}) has c + d below k0 + l0 = {target} at {:?}", sys.params().to_raw())
            })?;
        }
    }
    Ok(admissible)
}

fn sum_lower_bound_window_i(_: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut admissible = 0;
    for _ in 0..10 {
        let sys = random_system(GammaWindow::WindowI, rng)?;
        let (k0, l0) = k0_l0(&solve(&sys)?);
        admissible += sum_bound(&sys, k0, l0, 10_000, rng)?;
    }
    Ok(format!("{admissible} admissible samples respect the bound"))
}

fn uniqueness_window_ii(_: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for _ in 0..5 {
        let sys = random_system(GammaWindow::WindowIi, rng)?;
        let sols = solve(&sys)?;
        fail(sols.len() == 1, || format!("{} roots at {:?}", sols.len(), sys.params().to_raw()))?;
        let (k0, l0) = k0_l0(&sols);
        let step = 1e-3;
        let mut i = 1;
        while i as f64 * step <= 1.0 {
            let k = i as f64 * step;
            let mut j = 1;
            while j as f64 * step <= 1.0 && k + j as f64 * step <= k0 + l0 - 1e-9 {
                let l = j as f64 * step;
                if (k - k0).abs() > step || (l - l0).abs() > step {
                    let f1 = algebraic::f1(k, l, &sys).map_err(|e| e.to_string())?;
                    let f2 = algebraic::f2(k, l, &sys).map_err(|e| e.to_string())?;
                    fail(!(f1 >= 0.0 && f2 >= 0.0), || {
                        format!("({k}, {l}) satisfies both inequalities below k0 + l0 at {:?}", sys.params().to_raw())
                    })?;
                }
                j += 1;
            }
            i += 1;
        }
    }
    Ok("no competitor on a 1e-3 lattice".into())
}

fn slope_bound_window_ii(_: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let sys = random_system(GammaWindow::WindowIi, rng)?;
        for i in 1..=2000 {
            let k = i as f64 / 2000.0;
            let d = algebraic::ell_prime(k, &sys).map_err(|e| e.to_string())?;
            worst = worst.min(d);
            fail(d >= -1.0 - 1e-9, || format!("l'({k}) = {d} at {:?}", sys.params().to_raw()))?;
        }
    }
    Ok(format!("smallest slope {worst}"))
}

fn ordering_below_k0(_: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    // only Window II: in Window I, l(k) blows up as k -> 0 and F2 turns positive
    for _ in 0..20 {
        let sys = random_system(GammaWindow::WindowIi, rng)?;
        let (k0, _) = k0_l0(&solve(&sys)?);
        for i in 1..1000 {
            let k = k0 * i as f64 / 1000.0;
            let l = algebraic::ell_of_k(k, &sys).map_err(|e| e.to_string())?;
            if l == 0.0 {
                continue;
            }
            let f2 = algebraic::f2(k, l, &sys).map_err(|e| e.to_string())?;
            fail(f2 < 0.0, || {
                format!("F2(k, l(k)) = {f2} at k = {k} < k0 = {k0} for {:?}", sys.params().to_raw())
            })?;
        }
    }
    Ok("F2 negative along the curve below k0".into())
}

fn branch_matches_roots(_: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for _ in 0..5 {
        let ps = sample_window(GammaWindow::WindowIi, rng);
        let gamma = 1e-3;
        let branch = algebraic::continue_branch(&ps, &[1e-6, gamma]).map_err(|e| e.to_string())?;
        let last = branch.points.last().ok_or("empty branch")?;
        let sols = solve(&GammaSystem::new(ps, gamma).map_err(|e| e.to_string())?)?;
        fail(
            sols.iter().any(|s| (s.k - last.k).abs() < 1e-8 && (s.l - last.l).abs() < 1e-8),
            || format!("branch point ({}, {}) not among roots {sols:?}", last.k, last.l),
        )?;
    }
    Ok("branch endpoints are roots".into())
}

fn trivial_jacobian(_: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for _ in 0..50 {
        let ps = sample_admissible(rng);
        let sys = GammaSystem::new(ps, 1e-14).map_err(|e| e.to_string())?;
        let j = algebraic::jacobian(1.0, 1.0, &sys);
        let q = (ps.p_star() - ps.p()) / ps.p();
        let err = (j[0][0] - q).abs().max((j[1][1] - q).abs()).max(j[0][1].abs()).max(j[1][0].abs());
        fail(err < 1e-10, || format!("Jacobian {j:?} vs diag {q} at {:?}", ps.to_raw()))?;
    }
    Ok("diagonal (p*-p)/p, zero off-diagonal".into())
}

// ---------------------------------------------------------------------------
// gagliardo

fn lattice_params() -> [ParamSet; 2] {
    [
        ParamSet::from_alpha(1, 0.25, 1.8, 1.5).expect("fixed tuple is admissible"),
        ParamSet::from_alpha(1, 0.5, 1.5, 1.2).expect("fixed tuple is admissible"),
    ]
}

fn random_function(grid: &Grid1D, rng: &mut ChaCha8Rng) -> DiscreteFunction {
    let vals = (0..grid.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    DiscreteFunction::new(grid.clone(), vals).expect("finite samples on a free grid")
}

fn sample_lattice_params(rng: &mut ChaCha8Rng) -> ParamSet {
    loop {
        let s: f64 = rng.gen_range(0.1..0.6);
        let p = rng.gen_range(1.2..(0.95 / s).min(3.0));
        let ps = match critical_exponent(1, s, p) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if ps - 1.0 > 1.05 {
            if let Ok(params) = ParamSet::from_alpha(1, s, p, rng.gen_range(1.02..ps - 1.02)) {
                return params;
            }
        }
    }
}

fn homogeneity(_: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let grid = Grid1D::new(10.0, 64).map_err(|e| e.to_string())?;
    for _ in 0..50 {
        let ps = sample_lattice_params(rng);
        let u = random_function(&grid, rng);
        let c: f64 = rng.gen_range(-5.0..5.0);
        let a = gagliardo::seminorm_p(&u, &ps).map_err(|e| e.to_string())?;
        let b = gagliardo::seminorm_p(&u.scaled(c), &ps).map_err(|e| e.to_string())?;
        let want = c.abs().powf(ps.p()) * a;
        fail((b - want).abs() <= 1e-12 * want, || format!("{b} vs {want}"))?;
    }
    Ok("50 scalings".into())
}

fn euler_identity(_: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let grid = Grid1D::new(10.0, 64).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let ps = sample_lattice_params(rng);
        let u = random_function(&grid, rng);
        let a = gagliardo::seminorm_p(&u, &ps).map_err(|e| e.to_string())?;
        let lu = gagliardo::frac_p_laplacian_apply(&u, &ps).map_err(|e| e.to_string())?;
        let dot: f64 = lu.values().iter().zip(u.values()).map(|(x, y)| x * y).sum::<f64>() * grid.delta();
        let err = (dot - a).abs() / a;
        worst = worst.max(err);
        fail(err < 1e-10, || format!("<apply(u), u> = {dot}, seminorm {a}"))?;
    }
    Ok(format!("worst relative error {worst:e}"))
}

fn gradient_check(_: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let grid = Grid1D::new(10.0, 64).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let ps = sample_lattice_params(rng);
        let u = random_function(&grid, rng);
        let lat = gagliardo::Lattice::new(&grid, &ps).map_err(|e| e.to_string())?;
        let lu = lat.apply(u.values());
        for i in (0..64).step_by(7) {
            let h = 1e-6;
            let mut up = u.values().to_vec();
            let mut dn = up.clone();
            up[i] += h;
            dn[i] -= h;
            let fd = (lat.seminorm(&up) - lat.seminorm(&dn)) / (2.0 * h);
            let an = ps.p() * grid.delta() * lu[i];
            let err = (an - fd).abs() / an.abs().max(1e-3);
            worst = worst.max(err);
            fail(err < 1e-6, || format!("cell {i}: analytic {an}, difference quotient {fd}"))?;
        }
    }
    Ok(format!("worst relative error {worst:e}"))
}

fn coupling_factor(tau: f64, ps: &ParamSet) -> f64 {
    let (p, b, q) = (ps.p(), ps.beta(), ps.p_star());
    (1.0 + tau.powf(p)) / (1.0 + tau.powf(b) + tau.powf(q)).powf(p / q)
}

fn proportional_pair_identity(_: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let grid = Grid1D::new(10.0, 64).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let ps = sample_lattice_params(rng);
        let w = random_function(&grid, rng);
        let tau = 10f64.powf(rng.gen_range(-2.0..2.0));
        let qv = gagliardo::vector_quotient(&w, &w.scaled(tau), 1.0, 0.0, &ps).map_err(|e| e.to_string())?;
        let qs = gagliardo::scalar_quotient(&w, &ps).map_err(|e| e.to_string())?;
        let want = coupling_factor(tau, &ps) * qs;
        let err = (qv - want).abs() / want;
        worst = worst.max(err);
        fail(err < 1e-10, || format!("vector {qv} vs factor times scalar {want} at tau = {tau}"))?;
    }
    Ok(format!("worst relative error {worst:e}"))
}

fn nehari_energy(_: &VerifyConfig, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let grid = Grid1D::new(10.0, 64).map_err(|e| e.to_string())?;
    for _ in 0..100 {
        let ps = sample_lattice_params(rng);
        let gamma = rng.gen_range(0.0..3.0);
        let u = random_function(&grid, rng);
        let v = random_function(&grid, rng);
        let pr = gagliardo::nehari_project(&u, &v, gamma, &ps).map_err(|e| e.to_string())?;
        let j = gagliardo::j_energy(&pr.u, &pr.v, gamma, 0.0, &ps).map_err(|e| e.to_string())?;
        let kin = gagliardo::seminorm_p(&pr.u, &ps).map_err(|e| e.to_string())?
            + gagliardo::seminorm_p(&pr.v, &ps).map_err(|e| e.to_string())?;
        let want = ps.energy_factor() * kin;
        fail((j - want).abs() < 1e-10 * (1.0 + j.abs()), || format!("J = {j}, (s/N) kinetic = {want}"))?;
    }
    Ok("100 projected pairs".into())
}

fn start(grid: &Grid1D, ps: &ParamSet) -> std::result::Result<DiscreteFunction, String> {
    gagliardo::conjectured_profile(grid, 1.0, ps).map_err(|e| e.to_string())
}

fn tight() -> OptimizerOptions {
    OptimizerOptions {
        tol: 1e-14,
        grad_tol: 1e-10,
        max_iter: 50_000,
        ..Default::default()
    }
}

fn scaled_pair_minimum(_: &VerifyConfig, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let ps = lattice_params()[0];
    let grid = Grid1D::new(gagliardo::DEFAULT_HALF_WIDTH, gagliardo::DEFAULT_N).map_err(|e| e.to_string())?;
    let init = start(&grid, &ps)?;
    let c = coupling::classify(&ps);
    let scalar = gagliardo::minimize_scalar(&init, &ps, &tight()).map_err(|e| e.to_string())?;
    let vector = gagliardo::minimize_vector(&init, &init.scaled(c.tau_min), 1.0, 0.0, &ps, &tight())
        .map_err(|e| e.to_string())?;
    let rel = (vector.value - c.h_at_tau_min * scalar.value).abs() / scalar.value;
    fail(rel < 1e-3, || format!("relative gap {rel:e}"))?;
    Ok(format!("relative gap {rel:e}"))
}

fn mask_monotonicity(_: &VerifyConfig, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let ps = lattice_params()[0];
    let mut prev = 0.0;
    let mut values = Vec::new();
    for radius in [20.0, 8.0, 4.0, 2.0] {
        let grid = Grid1D::new(10.0, 64)
            .and_then(|g| if radius >= 10.0 { Ok(g) } else { g.with_ball(radius) })
            .map_err(|e| e.to_string())?;
        let init = start(&grid, &ps)?;
        let r = gagliardo::minimize_scalar(&init, &ps, &OptimizerOptions::default()).map_err(|e| e.to_string())?;
        fail(r.value >= prev * (1.0 - 1e-9), || {
            format!("pinning more cells lowered the minimum from {prev} to {} at R = {radius}", r.value)
        })?;
        prev = r.value;
        values.push(r.value);
    }
    Ok(format!("minima {values:?}"))
}

fn synchronized_residual(_: &VerifyConfig, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let ps = lattice_params()[0];
    let grid = Grid1D::new(gagliardo::DEFAULT_HALF_WIDTH, gagliardo::DEFAULT_N).map_err(|e| e.to_string())?;
    let r = gagliardo::minimize_scalar(&start(&grid, &ps)?, &ps, &tight()).map_err(|e| e.to_string())?;
    let u = gagliardo::normalize_to_solution(&r.minimizer, &ps).map_err(|e| e.to_string())?;
    let c = coupling::classify(&ps);
    let res = gagliardo::el_residual_system(&u.scaled(c.lambda), &u.scaled(c.mu), 1.0, &ps)
        .map_err(|e| e.to_string())?;
    fail(res < 10.0 * r.el_residual, || {
        format!("pair residual {res:e} vs scalar residual {:e}", r.el_residual)
    })?;
    Ok(format!("pair residual {res:e}, scalar {:e}", r.el_residual))
}

fn refinement(_: &VerifyConfig, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let ps = lattice_params()[0];
    let grid = Grid1D::new(gagliardo::DEFAULT_HALF_WIDTH, 64).map_err(|e| e.to_string())?;
    let coarse = gagliardo::minimize_scalar(&start(&grid, &ps)?, &ps, &OptimizerOptions::default())
        .map_err(|e| e.to_string())?;
    let fine = gagliardo::minimize_scalar(&coarse.minimizer.refined(), &ps, &OptimizerOptions::default())
        .map_err(|e| e.to_string())?;
    let rise = (fine.value - coarse.value) / coarse.value;
    fail(rise <= 1e-3, || format!("n -> 2n raised the minimum by {rise:e}"))?;
    Ok(format!("n = 64: {}, n = 128: {}", coarse.value, fine.value))
}

fn extremal_family_bound(_: &VerifyConfig, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let ps = ParamSet::from_alpha(1, 0.25, 2.0, 2.0).map_err(|e| e.to_string())?;
    let grid = Grid1D::new(gagliardo::DEFAULT_HALF_WIDTH, gagliardo::DEFAULT_N).map_err(|e| e.to_string())?;
    let r = gagliardo::minimize_scalar(&start(&grid, &ps)?, &ps, &OptimizerOptions::default())
        .map_err(|e| e.to_string())?;
    for t in [0.5, 1.0, 2.0, 4.0] {
        let prof = gagliardo::talenti_profile(&grid, t, &ps).map_err(|e| e.to_string())?;
        let q = gagliardo::scalar_quotient(&prof, &ps).map_err(|e| e.to_string())?;
        fail(q >= r.value * (1.0 - 1e-12), || format!("profile with t = {t} has quotient {q} below minimum {}", r.value))?;
    }
    Ok(format!("minimum {} below every sampled profile", r.value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samplers_hit_their_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in CouplingCase::ALL {
            for _ in 0..20 {
                assert_eq!(CouplingCase::of(&sample_case(case, &mut rng)), case);
            }
        }
        for w in [GammaWindow::WindowI, GammaWindow::WindowIi] {
            for _ in 0..20 {
                assert_eq!(regime_classify(&sample_window(w, &mut rng)).window, w);
            }
        }
    }

    #[test]
    fn golden_table_parses_and_flags_errors() {
        let rows = parse_golden(DEFAULT_GOLDEN.as_bytes()).unwrap();
        assert_eq!(rows.len(), 3);
        let bad = "N,s,p,p_star\n1,0.5,1.5,5.5\n";
        let cfg = VerifyConfig {
            golden: parse_golden(bad.as_bytes()).unwrap(),
            ..Default::default()
        };
        let out = run(&cfg, Some("exponents.golden_exponents")).unwrap();
        assert!(!out.all_passed());
        assert!(out.checks[0].detail.contains("5.5"));
    }

    #[test]
    fn filter_selects_module() {
        let cfg = VerifyConfig {
            sweep: 20,
            ..Default::default()
        };
        let out = run(&cfg, Some("exponents")).unwrap();
        assert_eq!(out.checks.len(), 4);
        assert!(out.all_passed(), "{out:?}");
        assert!(run(&cfg, Some("nope")).is_err());
    }

    #[test]
    fn registry_ids_are_unique() {
        let ids: std::collections::HashSet<String> = registry().iter().map(|c| c.id()).collect();
        assert_eq!(ids.len(), registry().len());
    }
}
