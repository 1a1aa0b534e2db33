use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A single violated admissibility constraint on a parameter tuple.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DimensionNotPositiveInteger(f64),
    FractionalOrderOutOfRange(f64),
    ExponentNotAboveOne(f64),
    SobolevCondition { n: f64, sp: f64 },
    AlphaNotAboveOne(f64),
    BetaNotAboveOne(f64),
    CriticalSum { sum: f64, p_star: f64 },
    NotFinite(&'static str),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionNotPositiveInteger(n) => {
                write!(f, "N = {n} is not a positive integer")
            }
            Violation::FractionalOrderOutOfRange(s) => write!(f, "s = {s} is not in (0, 1)"),
            Violation::ExponentNotAboveOne(p) => write!(f, "p = {p} is not > 1"),
            Violation::SobolevCondition { n, sp } => {
                write!(f, "N > s*p fails: N = {n}, s*p = {sp}")
            }
            Violation::AlphaNotAboveOne(a) => write!(f, "alpha = {a} is not > 1"),
            Violation::BetaNotAboveOne(b) => write!(f, "beta = {b} is not > 1"),
            Violation::CriticalSum { sum, p_star } => {
                write!(f, "alpha + beta = {sum} differs from p*_s = {p_star}")
            }
            Violation::NotFinite(name) => write!(f, "{name} is not finite"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", join_violations(.0))]
    InvalidParams(Vec<Violation>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no solution found: {0}")]
    NoSolution(String),

    #[error("continuation failed at gamma = {gamma}: {reason}")]
    Continuation { gamma: f64, reason: String },

    #[error("unsupported dimension N = {0}: the lattice layer handles N = 1 only")]
    UnsupportedDimension(u32),

    #[error("optimizer did not converge after {iterations} iterations: {reason}")]
    NonConvergence { iterations: usize, reason: String },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
