//! Normalized gradient descent for the lattice quotients.

use serde::{Deserialize, Serialize};

use super::energy::el_residual_system;
use super::grid::{DiscreteFunction, Grid1D};
use super::kernel::Lattice;
use super::quotient::{ScalarQuotient, VectorQuotient};
use crate::error::{Error, Result};
use crate::exponents::ParamSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    /// Stop once the relative decrease of the quotient over one step falls
    /// below this.
    pub tol: f64,
    /// Stop once `‖∇Q‖ / Q` falls below this.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Apply the symmetric decreasing rearrangement after every step.
    pub symmetrize: bool,
    /// Sufficient-decrease constant of the backtracking search.
    pub armijo_c: f64,
    /// Backtracking factor.
    pub shrink: f64,
    pub initial_step: f64,
    pub min_step: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            grad_tol: 1e-9,
            max_iter: 20_000,
            symmetrize: true,
            armijo_c: 1e-4,
            shrink: 0.5,
            initial_step: 1.0,
            min_step: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    RelativeDecrease,
    SmallGradient,
    StepUnderflow,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayleighResult {
    pub value: f64,
    pub minimizer: DiscreteFunction,
    /// Second component for vector problems.
    pub minimizer_v: Option<DiscreteFunction>,
    pub iterations: usize,
    pub grad_norm: f64,
    pub el_residual: f64,
    pub stop: StopReason,
    /// Quotient value before the first step and after every accepted step.
    pub history: Vec<f64>,
}

impl RayleighResult {
    pub fn converged(&self) -> bool {
        self.stop != StopReason::MaxIterations
    }
}

/// Symmetric decreasing rearrangement of `|u|` over the free cells.
///
/// Free cells are filled from the center outwards; mirrored cells receive
/// the mean of the two sorted values that land on them, which keeps the
/// profile even and nonincreasing in `|x|`.
pub fn symmetric_rearrangement(u: &mut [f64], grid: &Grid1D) {
    let n = grid.n();
    let mut order: Vec<usize> = (0..n).filter(|&i| grid.is_free(i)).collect();
    // nearest the center first, left before right on ties
    order.sort_by(|&i, &j| {
        grid.x(i)
            .abs()
            .partial_cmp(&grid.x(j).abs())
            .unwrap()
            .then(i.cmp(&j))
    });
    let mut vals: Vec<f64> = order.iter().map(|&i| u[i].abs()).collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for (&i, &v) in order.iter().zip(&vals) {
        u[i] = v;
    }
    for i in 0..n / 2 {
        let j = n - 1 - i;
        if grid.is_free(i) && grid.is_free(j) {
            let m = 0.5 * (u[i] + u[j]);
            u[i] = m;
            u[j] = m;
        }
    }
}

trait Problem {
    fn value(&self, x: &[f64]) -> f64;
    fn value_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>);
    fn normalize(&self, x: &mut [f64]) -> Result<()>;
    fn grid(&self) -> &Grid1D;
}

impl Problem for ScalarQuotient {
    fn value(&self, x: &[f64]) -> f64 {
        ScalarQuotient::value(self, x)
    }
    fn value_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        ScalarQuotient::value_and_grad(self, x)
    }
    fn normalize(&self, x: &mut [f64]) -> Result<()> {
        ScalarQuotient::normalize(self, x)
    }
    fn grid(&self) -> &Grid1D {
        self.lattice().grid()
    }
}

impl Problem for VectorQuotient {
    fn value(&self, x: &[f64]) -> f64 {
        VectorQuotient::value(self, x)
    }
    fn value_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        VectorQuotient::value_and_grad(self, x)
    }
    fn normalize(&self, x: &mut [f64]) -> Result<()> {
        VectorQuotient::normalize(self, x)
    }
    fn grid(&self) -> &Grid1D {
        self.lattice().grid()
    }
}

struct Outcome {
    x: Vec<f64>,
    value: f64,
    grad_norm: f64,
    iterations: usize,
    stop: StopReason,
    history: Vec<f64>,
}

fn project<P: Problem>(prob: &P, x: &mut [f64], symmetrize: bool) -> Result<()> {
    if symmetrize {
        let grid = prob.grid();
        for chunk in x.chunks_mut(grid.n()) {
            symmetric_rearrangement(chunk, grid);
        }
    }
    prob.normalize(x)
}

fn descend<P: Problem>(prob: &P, mut x: Vec<f64>, opts: &OptimizerOptions) -> Result<Outcome> {
    project(prob, &mut x, opts.symmetrize)?;
    let (mut q, mut g) = prob.value_and_grad(&x);
    let mut gn = norm(&g);
    let mut history = vec![q];
    let mut step = opts.initial_step;
    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if gn <= opts.grad_tol * q {
            stop = StopReason::SmallGradient;
            break;
        }
        let mut t = step;
        let accepted = loop {
            if t < opts.min_step {
                break None;
            }
            let mut trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi / gn).collect();
            if project(prob, &mut trial, opts.symmetrize).is_ok() {
                let qt = prob.value(&trial);
                if qt <= q - opts.armijo_c * t * gn {
                    break Some((trial, qt));
                }
            }
            t *= opts.shrink;
        };
        let Some((trial, qt)) = accepted else {
            stop = StopReason::StepUnderflow;
            break;
        };
        iterations += 1;
        let decrease = q - qt;
        x = trial;
        let (q_new, g_new) = prob.value_and_grad(&x);
        q = q_new;
        g = g_new;
        gn = norm(&g);
        history.push(q);
        if !q.is_finite() {
            return Err(Error::NonConvergence {
                iterations,
                reason: "quotient became non-finite".into(),
            });
        }
        step = (2.0 * t).min(opts.initial_step.max(t));
        if decrease <= opts.tol * q {
            stop = StopReason::RelativeDecrease;
            break;
        }
    }
    if stop == StopReason::MaxIterations {
        log::warn!(
            "descent hit {} iterations with relative gradient {:e}",
            opts.max_iter,
            gn / q
        );
    }
    Ok(Outcome {
        x,
        value: q,
        grad_norm: gn,
        iterations,
        stop,
        history,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Minimizes the scalar quotient from `init`.
pub fn minimize_scalar(
    init: &DiscreteFunction,
    params: &ParamSet,
    opts: &OptimizerOptions,
) -> Result<RayleighResult> {
    if init.is_zero() {
        return Err(Error::Precondition("initial function is zero".into()));
    }
    let lattice = Lattice::new(init.grid(), params)?;
    let prob = ScalarQuotient::new(lattice, params);
    let out = descend(&prob, init.values().to_vec(), opts)?;
    let minimizer = DiscreteFunction::new(init.grid().clone(), out.x)?;
    let el_residual = scalar_residual(&minimizer, params);
    Ok(RayleighResult {
        value: out.value,
        minimizer,
        minimizer_v: None,
        iterations: out.iterations,
        grad_norm: out.grad_norm,
        el_residual,
        stop: out.stop,
        history: out.history,
    })
}

/// Residual of the scalar equation after fitting the multiplier.
fn scalar_residual(u: &DiscreteFunction, params: &ParamSet) -> f64 {
    super::energy::normalize_to_solution(u, params)
        .and_then(|w| el_residual_system(&w, &DiscreteFunction::zeros(w.grid().clone()), 0.0, params))
        .unwrap_or(f64::NAN)
}

/// Minimizes the vector quotient with coupling `γ` and shift `ε`.
///
/// The reported residual is that of the coupled system after rescaling the
/// pair so that its fitted multiplier is one; it is meaningful for `ε = 0`.
pub fn minimize_vector(
    init_u: &DiscreteFunction,
    init_v: &DiscreteFunction,
    gamma: f64,
    eps_shift: f64,
    params: &ParamSet,
    opts: &OptimizerOptions,
) -> Result<RayleighResult> {
    if init_u.grid() != init_v.grid() {
        return Err(Error::Grid("u and v live on different lattices".into()));
    }
    if init_u.is_zero() && init_v.is_zero() {
        return Err(Error::Precondition("initial pair is zero".into()));
    }
    let grid = init_u.grid().clone();
    let n = grid.n();
    let lattice = Lattice::new(&grid, params)?;
    let prob = VectorQuotient::new(lattice, params, gamma, eps_shift)?;
    let x0: Vec<f64> = init_u.values().iter().chain(init_v.values()).copied().collect();
    let out = descend(&prob, x0, opts)?;
    let mut x = out.x;
    let v = x.split_off(n);
    let u = DiscreteFunction::new(grid.clone(), x)?;
    let v = DiscreteFunction::new(grid, v)?;
    let el_residual = super::energy::normalize_pair(&u, &v, gamma, params)
        .and_then(|(u, v)| el_residual_system(&u, &v, gamma, params))
        .unwrap_or(f64::NAN);
    Ok(RayleighResult {
        value: out.value,
        minimizer: u,
        minimizer_v: Some(v),
        iterations: out.iterations,
        grad_norm: out.grad_norm,
        el_residual,
        stop: out.stop,
        history: out.history,
    })
}
