//! `critcouple`: classify coupling regimes, solve the γ-system, continue
//! its branch, minimize lattice quotients and run the property suites.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use crate::commands::Status;
use crate::config::RunConfig;

/// Bad input: exits with code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Parser)]
#[command(name = "critcouple", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Classify the coupling function h and report tau_min, lambda, mu.
    Analyze,
    /// Solve the algebraic system at one gamma.
    SolveGamma,
    /// Follow the root through (1, 1) as gamma grows from 0.
    Continue,
    /// Minimize the scalar and/or vector lattice quotient.
    Minimize,
    /// Run the property suites.
    Verify,
}

/// Every flag may also be given as `key = value` in `--config`; flags win.
#[derive(Args)]
struct Flags {
    /// key = value file with defaults for every flag below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// "N,s,p,alpha" or "N,s,p,alpha,beta".
    #[arg(long, global = true, allow_hyphen_values = true)]
    params: Option<String>,
    #[arg(long, global = true)]
    gamma: Option<String>,
    /// Comma-separated increasing gamma values for `continue`.
    #[arg(long, global = true)]
    gamma_grid: Option<String>,
    #[arg(long, global = true)]
    grid_n: Option<String>,
    #[arg(long, global = true)]
    half_width: Option<String>,
    #[arg(long, global = true)]
    tol: Option<String>,
    #[arg(long, global = true)]
    max_iter: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Directory for CSV, JSON and SVG output.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Pin every cell outside |x| < R to zero.
    #[arg(long, global = true)]
    mask_radius: Option<String>,
    #[arg(long, global = true)]
    eps_shift: Option<String>,
    /// Run only checks whose module or id starts with this.
    #[arg(long, global = true)]
    filter: Option<String>,
    /// CSV with columns N,s,p,p_star replacing the built-in golden table.
    #[arg(long, global = true)]
    golden: Option<String>,
    /// Best constant S used by solve-gamma instead of a lattice estimate.
    #[arg(long, global = true)]
    scalar_constant: Option<String>,
    /// scalar, vector or both.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Random tuples per verify sweep.
    #[arg(long, global = true)]
    sweep: Option<String>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    svg: bool,
    /// -v for info, -vv for debug logging.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

impl Flags {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let pairs = [
            ("params", &self.params),
            ("gamma", &self.gamma),
            ("gamma_grid", &self.gamma_grid),
            ("grid_n", &self.grid_n),
            ("half_width", &self.half_width),
            ("tol", &self.tol),
            ("max_iter", &self.max_iter),
            ("seed", &self.seed),
            ("out", &self.out),
            ("mask_radius", &self.mask_radius),
            ("eps_shift", &self.eps_shift),
            ("filter", &self.filter),
            ("golden", &self.golden),
            ("scalar_constant", &self.scalar_constant),
            ("mode", &self.mode),
            ("sweep", &self.sweep),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.svg {
            cfg.svg = true;
        }
        Ok(cfg)
    }
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("CRITCOUPLE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Usage(format!("CRITCOUPLE_THREADS = {raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

/// Input errors exit with 2, everything else with 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    use critcouple::Error as E;
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::InvalidParams(_)
                | E::Domain(_)
                | E::Regime(_)
                | E::Precondition(_)
                | E::UnsupportedDimension(_)
                | E::Grid(_) => 2,
                _ => 1,
            };
        }
    }
    1
}

fn run(cli: &Cli) -> Result<Status> {
    init_threads()?;
    let cfg = cli.flags.resolve().map_err(|e| Usage(format!("{e:#}")))?;
    match cli.command {
        Command::Analyze => commands::analyze(&cfg),
        Command::SolveGamma => commands::solve_gamma(&cfg),
        Command::Continue => commands::continue_branch(&cfg),
        Command::Minimize => commands::minimize(&cfg),
        Command::Verify => commands::verify(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.flags.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
