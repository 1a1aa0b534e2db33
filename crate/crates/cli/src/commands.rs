use std::fs::File;

use anyhow::{Context, Result};
use critcouple::algebraic::{self, GammaSystem};
use critcouple::coupling;
use critcouple::exponents::{regime_classify, GammaWindow};
use critcouple::gagliardo::{self, DiscreteFunction, Grid1D, RayleighResult};
use critcouple::roots::log_grid;
use critcouple::verify::{self, VerifyConfig};
use critcouple::ParamSet;
use serde_json::json;

use crate::config::{Mode, RunConfig};
use crate::output::{num, Plot, Sink};
use crate::Usage;

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A check failed or an iteration did not converge.
    Failed,
}

/// Largest gap allowed between the two sides of `S_αβ = h(τ_min) S`.
const PAIR_TOL: f64 = 1e-3;

fn sink(cfg: &RunConfig) -> Result<Sink> {
    let sink = Sink::new(cfg.out.as_deref())?;
    sink.text("run_config.txt", &cfg.to_config_string())?;
    Ok(sink)
}

fn params_json(ps: &ParamSet) -> serde_json::Value {
    json!({
        "N": ps.n(),
        "s": ps.s(),
        "p": ps.p(),
        "alpha": ps.alpha(),
        "beta": ps.beta(),
        "p_star": ps.p_star(),
    })
}

pub fn analyze(cfg: &RunConfig) -> Result<Status> {
    let ps = cfg.params()?;
    let regime = regime_classify(&ps);
    let c = coupling::classify(&ps);
    let sync = (c.tau_min > 0.0)
        .then(|| coupling::verify_sync_relations(&c, &ps))
        .transpose()?;

    println!("params        N={} s={} p={} alpha={} beta={}", ps.n(), ps.s(), ps.p(), ps.alpha(), ps.beta());
    println!("p*            {}", ps.p_star());
    println!("regime        {:?}, {:?}", regime.tau_case, regime.window);
    println!("case          {}", c.case_label);
    println!("g roots       {:?}", c.g_roots);
    println!("tau_min       {}", c.tau_min);
    println!("h(tau_min)    {}", c.h_at_tau_min);
    println!("lambda, mu    {}, {}", c.lambda, c.mu);
    if let Some(r) = &sync {
        println!("sync residual {:e}, {:e}", r.first, r.second);
    }
    if !c.root_count_consistent {
        log::warn!("root count {} is not what case {} predicts", c.g_roots.len(), c.case_label);
    }

    let top = c.g_roots.last().copied().unwrap_or(1.0).max(1.0) * 100.0;
    let bottom = c.g_roots.first().copied().unwrap_or(1.0).min(1.0) * 1e-3;
    let taus = log_grid(bottom, top, 400);
    let sink = sink(cfg)?;
    sink.csv(
        "h_g_table.csv",
        &["tau", "h", "g", "h_prime"],
        taus.iter().map(|&t| {
            vec![
                num(t),
                num(coupling::h_eval(t, &ps)),
                num(coupling::g_eval(t, &ps)),
                num(coupling::h_prime(t, &ps)),
            ]
        }),
    )?;
    sink.csv(
        "g_roots.csv",
        &["tau", "h"],
        c.g_roots.iter().map(|&t| vec![num(t), num(coupling::h_eval(t, &ps))]),
    )?;
    sink.json(
        "analyze.json",
        &json!({
            "params": params_json(&ps),
            "regime": regime,
            "classification": c,
            "sync_residuals": sync.map(|r| [r.first, r.second]),
        }),
    )?;
    if cfg.svg {
        let h = Plot {
            title: "h(tau)",
            x_label: "tau",
            log_x: true,
            series: vec![("h", taus.iter().map(|&t| (t, coupling::h_eval(t, &ps))).collect())],
            reference_y: Some(1.0),
        };
        // g spans many decades; plot sign(g) log10(1 + |g|)
        let squash = |g: f64| g.signum() * g.abs().ln_1p() / std::f64::consts::LN_10;
        let g = Plot {
            title: "g(tau), compressed",
            x_label: "tau",
            log_x: true,
            series: vec![("g", taus.iter().map(|&t| (t, squash(coupling::g_eval(t, &ps)))).collect())],
            reference_y: Some(0.0),
        };
        sink.text("h.svg", &h.to_svg())?;
        sink.text("g.svg", &g.to_svg())?;
    }
    Ok(Status::Ok)
}

/// `S` for the least-energy value: the configured one, or a lattice
/// estimate when the lattice applies.
fn scalar_constant(cfg: &RunConfig, ps: &ParamSet) -> Result<Option<(f64, &'static str)>> {
    if let Some(s) = cfg.scalar_constant {
        return Ok(Some((s, "configured")));
    }
    if ps.n() != 1 {
        log::warn!("no scalar constant given and the lattice estimate needs N = 1; skipping A");
        return Ok(None);
    }
    let grid = Grid1D::new(cfg.half_width, cfg.grid_n)?;
    let init = gagliardo::conjectured_profile(&grid, 1.0, ps)?;
    let r = gagliardo::minimize_scalar(&init, ps, &cfg.optimizer_options())?;
    if !r.converged() {
        log::warn!("lattice estimate of S stopped after {} iterations without converging", r.iterations);
    }
    Ok(Some((r.value, "lattice estimate")))
}

pub fn solve_gamma(cfg: &RunConfig) -> Result<Status> {
    let ps = cfg.params()?;
    let gamma = cfg.gamma.ok_or_else(|| Usage("--gamma is required".into()))?;
    let sys = GammaSystem::new(ps, gamma)?;
    let window = regime_classify(&ps).window;
    let threshold = match window {
        GammaWindow::WindowI => {
            let t = algebraic::gamma_upper_threshold(&ps)?;
            if gamma > t {
                log::warn!("gamma = {gamma} exceeds the upper threshold {t}; the least-energy formula is not guaranteed");
            }
            Some(("upper", t))
        }
        GammaWindow::WindowIi => {
            let t = algebraic::gamma_lower_threshold(&ps)?;
            if gamma < t {
                log::warn!("gamma = {gamma} is below the lower threshold {t}; the least-energy formula is not guaranteed");
            }
            Some(("lower", t))
        }
        GammaWindow::Neither => {
            log::warn!("parameters lie in neither gamma window; roots are reported without guarantees");
            None
        }
    };

    let sols = algebraic::solve_all(&sys)?;
    let k0 = sols.iter().find(|s| s.is_k0).expect("solve_all marks a k0 root");
    let s_const = scalar_constant(cfg, &ps)?;
    let energy = s_const.map(|(s, _)| algebraic::least_energy(k0.k, k0.l, s, &ps));

    println!("window      {window:?}");
    if let Some((kind, t)) = threshold {
        println!("threshold   {kind} {t}");
    }
    println!("gamma       {gamma}");
    for s in &sols {
        let tag = match (s.is_k0, s.is_l1) {
            (true, true) => " k0 l1",
            (true, false) => " k0",
            (false, true) => " l1",
            _ => "",
        };
        println!("root        k={:.15e} l={:.15e} |F|={:.1e}{tag}", s.k, s.l, s.max_residual());
    }
    if let (Some((s, source)), Some(a)) = (s_const, energy) {
        println!("S           {s} ({source})");
        println!("A           {a}");
    }

    let sink = sink(cfg)?;
    sink.csv(
        "roots.csv",
        &["k", "l", "k_plus_l", "residual_f1", "residual_f2", "is_k0", "is_l1", "in_unit_square"],
        sols.iter().map(|s| {
            vec![
                num(s.k),
                num(s.l),
                num(s.sum()),
                num(s.residual_f1),
                num(s.residual_f2),
                s.is_k0.to_string(),
                s.is_l1.to_string(),
                s.in_unit_square.to_string(),
            ]
        }),
    )?;
    sink.json(
        "solve_gamma.json",
        &json!({
            "params": params_json(&ps),
            "gamma": gamma,
            "window": window,
            "threshold": threshold.map(|(kind, t)| json!({"kind": kind, "value": t})),
            "roots": sols,
            "scalar_constant": s_const.map(|(s, src)| json!({"value": s, "source": src})),
            "least_energy": energy,
        }),
    )?;
    Ok(Status::Ok)
}

/// Geometric grid from `1e-6` to `top`.
fn default_gamma_grid(top: f64) -> Vec<f64> {
    if top <= 1e-6 {
        return vec![top];
    }
    log_grid(1e-6, top, 61)
}

pub fn continue_branch(cfg: &RunConfig) -> Result<Status> {
    let ps = cfg.params()?;
    let grid = match &cfg.gamma_grid {
        Some(g) if g.is_empty() => return Err(Usage("--gamma-grid is empty".into()).into()),
        Some(g) => g.clone(),
        None => default_gamma_grid(cfg.gamma.unwrap_or(1.0)),
    };
    let branch = algebraic::continue_branch(&ps, &grid)?;

    let sink = sink(cfg)?;
    let start = algebraic::BranchPoint { gamma: 0.0, k: 1.0, l: 1.0 };
    let rows = std::iter::once(&start).chain(&branch.points);
    sink.csv(
        "branch.csv",
        &["gamma", "k", "l", "k_plus_l"],
        rows.clone().map(|p| vec![num(p.gamma), num(p.k), num(p.l), num(p.sum())]),
    )?;
    sink.json(
        "continue.json",
        &json!({
            "params": params_json(&ps),
            "points": branch.points.len(),
            "gamma_1": branch.gamma_1,
            "failure": branch.failure,
        }),
    )?;
    if cfg.svg {
        let plot = Plot {
            title: "k + l along the branch",
            x_label: "gamma",
            log_x: true,
            series: vec![("k + l", branch.points.iter().map(|p| (p.gamma, p.sum())).collect())],
            reference_y: Some(1.0),
        };
        sink.text("branch.svg", &plot.to_svg())?;
    }

    for p in rows {
        println!("gamma={:<12.6e} k={:.15e} l={:.15e} k+l={:.15e}", p.gamma, p.k, p.l, p.sum());
    }
    match branch.gamma_1 {
        Some(g) => println!("gamma_1     {g} (last grid value with k + l > 1)"),
        None => println!("gamma_1     none: k + l <= 1 at the first grid value"),
    }
    if let Some(f) = &branch.failure {
        eprintln!(
            "continuation failed between gamma = {} and {}: {}",
            f.last_good_gamma, f.attempted_gamma, f.reason
        );
        return Ok(Status::Failed);
    }
    Ok(Status::Ok)
}

fn report(label: &str, r: &RayleighResult) {
    println!(
        "{label:<7} value={} iterations={} stop={:?} residual={:.3e}",
        r.value, r.iterations, r.stop, r.el_residual
    );
}

fn history_rows(r: &RayleighResult) -> impl Iterator<Item = Vec<String>> + '_ {
    r.history.iter().enumerate().map(|(i, v)| vec![i.to_string(), num(*v)])
}

pub fn minimize(cfg: &RunConfig) -> Result<Status> {
    let ps = cfg.params()?;
    let mut grid = Grid1D::new(cfg.half_width, cfg.grid_n)?;
    if let Some(r) = cfg.mask_radius {
        grid = grid.with_ball(r)?;
    }
    let opts = cfg.optimizer_options();
    let gamma = cfg.gamma.unwrap_or(1.0);
    let u0 = gagliardo::conjectured_profile(&grid, 1.0, &ps)?;
    let c = coupling::classify(&ps);
    let sink = sink(cfg)?;
    let xs = grid.xs();

    let scalar = match cfg.mode {
        Mode::Vector => None,
        _ => Some(gagliardo::minimize_scalar(&u0, &ps, &opts)?),
    };
    let vector = match cfg.mode {
        Mode::Scalar => None,
        _ => {
            let t = if c.tau_min > 0.0 { c.tau_min } else { 0.5 };
            Some(gagliardo::minimize_vector(&u0, &u0.scaled(t), gamma, cfg.eps_shift, &ps, &opts)?)
        }
    };

    let mut status = Status::Ok;
    if let Some(r) = &scalar {
        report("scalar", r);
        sink.csv("scalar_minimizer.csv", &["x", "u"], xs.iter().zip(r.minimizer.values()).map(|(x, u)| vec![num(*x), num(*u)]))?;
        sink.csv("scalar_history.csv", &["iteration", "value"], history_rows(r))?;
    }
    if let Some(r) = &vector {
        report("vector", r);
        let v = r.minimizer_v.as_ref().expect("vector result carries v");
        sink.csv(
            "vector_minimizer.csv",
            &["x", "u", "v"],
            (0..xs.len()).map(|i| vec![num(xs[i]), num(r.minimizer.values()[i]), num(v.values()[i])]),
        )?;
        sink.csv("vector_history.csv", &["iteration", "value"], history_rows(r))?;
    }
    for r in scalar.iter().chain(&vector) {
        if !r.converged() {
            eprintln!("optimizer hit max_iter = {} with gradient norm {:e}", cfg.max_iter, r.grad_norm);
            status = Status::Failed;
        }
    }

    let comparison = match (&scalar, &vector) {
        (Some(s), Some(v)) if gamma == 1.0 && cfg.eps_shift == 0.0 => {
            let rel = (v.value - c.h_at_tau_min * s.value).abs() / s.value;
            println!("pair    |S_ab - h(tau_min) S| / S = {rel:.3e} (h(tau_min) = {})", c.h_at_tau_min);
            if rel >= PAIR_TOL {
                eprintln!("pair comparison {rel:e} is not below {PAIR_TOL:e}");
                status = Status::Failed;
            }
            Some(rel)
        }
        _ => None,
    };

    let summary = |r: &RayleighResult| {
        json!({
            "value": r.value,
            "iterations": r.iterations,
            "stop": r.stop,
            "grad_norm": r.grad_norm,
            "el_residual": r.el_residual,
        })
    };
    sink.json(
        "minimize.json",
        &json!({
            "params": params_json(&ps),
            "gamma": gamma,
            "eps_shift": cfg.eps_shift,
            "grid_n": cfg.grid_n,
            "half_width": cfg.half_width,
            "mask_radius": cfg.mask_radius,
            "scalar": scalar.as_ref().map(summary),
            "vector": vector.as_ref().map(summary),
            "h_at_tau_min": c.h_at_tau_min,
            "pair_relative_gap": comparison,
        }),
    )?;
    if cfg.svg {
        let mut series = Vec::new();
        let curve = |f: &DiscreteFunction| xs.iter().copied().zip(f.values().iter().copied()).collect::<Vec<_>>();
        if let Some(r) = &scalar {
            series.push(("scalar u", curve(&r.minimizer)));
        }
        if let Some(r) = &vector {
            series.push(("vector u", curve(&r.minimizer)));
            series.push(("vector v", curve(r.minimizer_v.as_ref().unwrap())));
        }
        let plot = Plot { title: "minimizers", x_label: "x", log_x: false, series, reference_y: None };
        sink.text("minimizers.svg", &plot.to_svg())?;
    }
    Ok(status)
}

pub fn verify(cfg: &RunConfig) -> Result<Status> {
    let golden = match &cfg.golden {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            verify::parse_golden(f).map_err(|e| Usage(format!("golden file {}: {e}", path.display())))?
        }
        None => VerifyConfig::default().golden,
    };
    let vc = VerifyConfig { seed: cfg.seed, sweep: cfg.sweep, golden };
    let summary = verify::run(&vc, cfg.filter.as_deref())?;
    for c in &summary.checks {
        println!(
            "{} {:<40} {:>7.2} s  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.seconds,
            c.detail
        );
    }
    let failed = summary.failed().count();
    println!("{} checks, {} passed, {failed} failed", summary.checks.len(), summary.checks.len() - failed);
    let sink = sink(cfg)?;
    sink.json("verify.json", &summary)?;
    Ok(if summary.all_passed() { Status::Ok } else { Status::Failed })
}
