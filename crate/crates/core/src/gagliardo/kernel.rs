use rayon::prelude::*;

use super::grid::{DiscreteFunction, Grid1D};
use crate::error::{Error, Result};
use crate::exponents::ParamSet;

/// Rows per rayon task; below this the sweep runs on the calling thread.
const PAR_MIN_ROWS: usize = 256;

/// `|x|^{r−1} x`, zero at zero.
#[inline]
pub(crate) fn spow(x: f64, r: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(r - 1.0)
    }
}

/// Precomputed interaction weights of the Gagliardo form on one lattice.
///
/// `kernel[m] = (mΔ)^{−1−sp}` for `m ≥ 1` and `tail[i] = ∫_{|y|>L} |x_i − y|^{−1−sp} dy`.
#[derive(Debug, Clone)]
pub struct Lattice {
    grid: Grid1D,
    p: f64,
    kernel: Vec<f64>,
    tail: Vec<f64>,
}

impl Lattice {
    pub fn new(grid: &Grid1D, params: &ParamSet) -> Result<Self> {
        if params.n() != 1 {
            return Err(Error::UnsupportedDimension(params.n()));
        }
        let sp = params.s() * params.p();
        let delta = grid.delta();
        let l = grid.half_width();
        let kernel = (0..grid.n())
            .map(|m| {
                if m == 0 {
                    0.0
                } else {
                    (m as f64 * delta).powf(-1.0 - sp)
                }
            })
            .collect();
        let tail = (0..grid.n())
            .map(|i| {
                let x = grid.x(i);
                ((l - x).powf(-sp) + (l + x).powf(-sp)) / sp
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            p: params.p(),
            kernel,
            tail,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    pub fn tail(&self) -> &[f64] {
        &self.tail
    }

    /// Row `i`: `(Σ_j |d|^p K, Σ_j φ_p(d) K)` with `d = u_i − u_j`.
    #[inline]
    fn row(&self, u: &[f64], i: usize) -> (f64, f64) {
        let p = self.p;
        let ui = u[i];
        let mut energy = 0.0;
        let mut force = 0.0;
        for (j, &uj) in u.iter().enumerate() {
            let d = ui - uj;
            if d == 0.0 {
                continue;
            }
            let k = self.kernel[i.abs_diff(j)];
            let ad = d.abs();
            let pm1 = ((p - 1.0) * ad.ln()).exp();
            energy += ad * pm1 * k;
            force += d.signum() * pm1 * k;
        }
        (energy, force)
    }

    fn rows(&self, u: &[f64]) -> Vec<(f64, f64)> {
        let n = u.len();
        if n >= PAR_MIN_ROWS && rayon::current_num_threads() > 1 {
            (0..n).into_par_iter().map(|i| self.row(u, i)).collect()
        } else {
            (0..n).map(|i| self.row(u, i)).collect()
        }
    }

    /// Discrete seminorm together with the operator, in one sweep.
    ///
    /// Row sums are reduced in index order, so the result does not depend on
    /// the number of worker threads.
    pub fn energy_and_apply(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let delta = self.grid.delta();
        let p = self.p;
        let rows = self.rows(u);
        let mut pair = 0.0;
        let mut ext = 0.0;
        let mut out = Vec::with_capacity(u.len());
        for (i, &(e, f)) in rows.iter().enumerate() {
            pair += e;
            let t = self.tail[i];
            let ui = u[i];
            ext += ui.abs().powf(p) * t;
            let a = 2.0 * delta * f + 2.0 * spow(ui, p) * t;
            out.push(if self.grid.is_free(i) { a } else { 0.0 });
        }
        (pair * delta * delta + 2.0 * delta * ext, out)
    }

    pub fn seminorm(&self, u: &[f64]) -> f64 {
        let delta = self.grid.delta();
        let pair: f64 = self.rows(u).iter().map(|r| r.0).sum();
        let ext: f64 = u
            .iter()
            .zip(&self.tail)
            .map(|(ui, t)| ui.abs().powf(self.p) * t)
            .sum();
        pair * delta * delta + 2.0 * delta * ext
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.energy_and_apply(u).1
    }
}

/// Discrete Gagliardo seminorm `‖u‖^p`, exterior interaction included.
pub fn seminorm_p(u: &DiscreteFunction, params: &ParamSet) -> Result<f64> {
    Ok(Lattice::new(u.grid(), params)?.seminorm(u.values()))
}

/// Discrete fractional `p`-Laplacian: the gradient of `(1/p)‖u‖^p` divided
/// by `Δ`. Pinned cells read zero.
pub fn frac_p_laplacian_apply(u: &DiscreteFunction, params: &ParamSet) -> Result<DiscreteFunction> {
    let lat = Lattice::new(u.grid(), params)?;
    DiscreteFunction::new(u.grid().clone(), lat.apply(u.values()))
}
