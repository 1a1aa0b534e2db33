use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critcouple"))
        .args(args)
        .env_remove("CRITCOUPLE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').filter_map(|x| x.parse().ok()).collect())
        .collect()
}

#[test]
fn analyze_reports_case_one_below_one() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("a");
    let out = run(&["analyze", "--params", "4,0.5,2,1.3333333333333333", "--out", out_dir.to_str().unwrap(), "--svg"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("case          1"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("analyze.json")).unwrap()).unwrap();
    let h = json["classification"]["h_at_tau_min"].as_f64().unwrap();
    assert!((h - 0.877383).abs() < 1e-6, "{h}");
    for f in ["h_g_table.csv", "g_roots.csv", "h.svg", "g.svg", "run_config.txt"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    // full precision: every number carries 17 significant digits
    let table = fs::read_to_string(out_dir.join("h_g_table.csv")).unwrap();
    let first = table.lines().nth(1).unwrap();
    for field in first.split(',') {
        let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 17, "{field}");
    }
}

#[test]
fn analyze_degenerate_tuple() {
    let out = run(&["analyze", "--params", "2,0.5,2,2"]);
    assert_eq!(code(&out), 0);
    let s = stdout(&out);
    assert!(s.contains("case          2i"));
    assert!(s.contains("tau_min       0\n"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "params = 1,0.25,1.8,1.5\nthis line is broken\n").unwrap();
    assert_eq!(code(&run(&["analyze", "--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["analyze", "--params", "1,0.25,1.8"])), 2);
    assert_eq!(code(&run(&["analyze", "--params", "1,0.25,1.8,9"])), 2);
    assert_eq!(code(&run(&["analyze"])), 2);
    assert_eq!(code(&run(&["solve-gamma", "--params", "1,0.25,1.8,1.5"])), 2);
    assert_eq!(code(&run(&["continue", "--params", "1,0.25,1.8,1.5", "--gamma-grid", ""])), 2);
    assert_eq!(code(&run(&["minimize", "--params", "1,0.25,1.8,1.5", "--mask-radius", "0.01"])), 2);
    assert_eq!(code(&run(&["verify", "--filter", "no_such_check"])), 2);
    assert_eq!(code(&run(&["no-such-command"])), 2);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# base\nparams = 2,0.5,2,2\ngrid_n = 64\n").unwrap();
    let out_dir = dir.path().join("o");
    let out = run(&[
        "analyze",
        "--config",
        cfg.to_str().unwrap(),
        "--params",
        "4,0.5,2,1.3333333333333333",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("case          1"));
    let echoed = fs::read_to_string(out_dir.join("run_config.txt")).unwrap();
    assert!(echoed.contains("grid_n = 64"));
    assert!(echoed.contains("params = 4,0.5,2,1.3333333333333333"));
}

#[test]
fn solve_gamma_small_gamma_and_threshold_warning() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve-gamma", "--params", "1,0.5,1.5,3,3", "--gamma", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let r = rows(&dir.path().join("roots.csv"));
    // symmetric exponents give a symmetric root
    assert!(r.iter().any(|x| (x[0] - x[1]).abs() < 1e-12));

    let warn = run(&["solve-gamma", "--params", "1,0.5,1.5,3,3", "--gamma", "10", "--scalar-constant", "1"]);
    assert_eq!(code(&warn), 0);
    assert!(String::from_utf8_lossy(&warn.stderr).contains("exceeds the upper threshold"));
}

#[test]
fn continue_starts_at_one_one_and_stays_above_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "continue",
        "--params",
        "1,0.25,1.8,1.5",
        "--gamma-grid",
        "1e-6,1e-3,0.1,0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = rows(&dir.path().join("branch.csv"));
    assert_eq!(r[0], vec![0.0, 1.0, 1.0, 2.0]);
    assert!((r[1][3] - 2.0).abs() < 1e-4);
    assert!(r.iter().all(|x| x[3] > 1.0));
}

#[test]
fn minimize_pair_comparison_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = run(&["minimize", "--params", "1,0.25,1.8,1.5", "--grid-n", "48", "--half-width", "8", "--out", d.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["scalar_minimizer.csv", "vector_minimizer.csv", "scalar_history.csv", "vector_history.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let hist = rows(&a.join("scalar_history.csv"));
    assert!(hist.windows(2).all(|w| w[1][1] <= w[0][1]));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("minimize.json")).unwrap()).unwrap();
    assert!(json["pair_relative_gap"].as_f64().unwrap() < 1e-3);
}

#[test]
fn minimize_without_convergence_exits_with_one() {
    let out = run(&["minimize", "--params", "1,0.25,1.8,1.5", "--grid-n", "32", "--max-iter", "3", "--mode", "scalar"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn verify_filter_and_bad_golden() {
    let out = run(&["verify", "--filter", "exponents"]);
    assert_eq!(code(&out), 0);
    let s = stdout(&out);
    assert!(s.lines().filter(|l| l.starts_with("PASS")).all(|l| l.contains("exponents.")));

    let dir = tempfile::tempdir().unwrap();
    let golden = dir.path().join("golden.csv");
    fs::write(&golden, "N,s,p,p_star\n1,0.5,1.5,5\n").unwrap();
    let bad = run(&["verify", "--filter", "exponents", "--golden", golden.to_str().unwrap()]);
    assert_eq!(code(&bad), 1);
    assert!(stdout(&bad).contains("FAIL exponents.golden_exponents"));
}

#[test]
fn thread_cap_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_critcouple"))
        .args(["analyze", "--params", "2,0.5,2,2"])
        .env("CRITCOUPLE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let ok = Command::new(env!("CARGO_BIN_EXE_critcouple"))
        .args(["analyze", "--params", "2,0.5,2,2"])
        .env("CRITCOUPLE_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
}
