//! Rayleigh quotients on the lattice and their gradients.

use super::grid::DiscreteFunction;
use super::kernel::{spow, Lattice};
use crate::error::{Error, Result};
use crate::exponents::ParamSet;

/// Exponents of the vector quotient with shift `ε`:
/// `(q, a, b) = (p* − 2ε, α − ε, β − ε)`.
pub fn shifted_exponents(params: &ParamSet, eps_shift: f64) -> Result<(f64, f64, f64)> {
    let limit = params.alpha().min(params.beta()) - 1.0;
    if !(eps_shift >= 0.0 && eps_shift < limit) {
        return Err(Error::Domain(format!(
            "eps_shift = {eps_shift} must lie in [0, {limit})"
        )));
    }
    Ok((
        params.p_star() - 2.0 * eps_shift,
        params.alpha() - eps_shift,
        params.beta() - eps_shift,
    ))
}

/// `Δ Σ |u_i|^r`.
pub(crate) fn lp_sum(u: &[f64], r: f64, delta: f64) -> f64 {
    delta * u.iter().map(|x| x.abs().powf(r)).sum::<f64>()
}

/// `Δ Σ (|u|^q + |v|^q + γ |u|^a |v|^b)`.
pub(crate) fn coupled_sum(u: &[f64], v: &[f64], gamma: f64, q: f64, a: f64, b: f64, delta: f64) -> f64 {
    delta
        * u.iter()
            .zip(v)
            .map(|(x, y)| {
                let (x, y) = (x.abs(), y.abs());
                let mut t = x.powf(q) + y.powf(q);
                if gamma != 0.0 && x > 0.0 && y > 0.0 {
                    t += gamma * x.powf(a) * y.powf(b);
                }
                t
            })
            .sum::<f64>()
}

/// Scalar quotient problem `‖u‖^p / (Δ Σ |u|^{p*})^{p/p*}`.
#[derive(Debug, Clone)]
pub struct ScalarQuotient {
    lattice: Lattice,
    p: f64,
    p_star: f64,
}

impl ScalarQuotient {
    pub fn new(lattice: Lattice, params: &ParamSet) -> Self {
        Self {
            lattice,
            p: params.p(),
            p_star: params.p_star(),
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        let delta = self.lattice.grid().delta();
        self.lattice.seminorm(u) / lp_sum(u, self.p_star, delta).powf(self.p / self.p_star)
    }

    /// Quotient and its Euclidean gradient in the cell values.
    pub fn value_and_grad(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let delta = self.lattice.grid().delta();
        let (a, lu) = self.lattice.energy_and_apply(u);
        let b = lp_sum(u, self.p_star, delta);
        let scale = self.p * delta * b.powf(-self.p / self.p_star);
        let ratio = a / b;
        let grad = lu
            .iter()
            .zip(u)
            .enumerate()
            .map(|(i, (l, x))| {
                if self.lattice.grid().is_free(i) {
                    scale * (l - ratio * spow(*x, self.p_star))
                } else {
                    0.0
                }
            })
            .collect();
        (a / b.powf(self.p / self.p_star), grad)
    }

    /// Rescales onto `Δ Σ |u|^{p*} = 1`.
    pub fn normalize(&self, u: &mut [f64]) -> Result<()> {
        let b = lp_sum(u, self.p_star, self.lattice.grid().delta());
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Precondition("cannot normalize a zero function".into()));
        }
        let c = b.powf(-1.0 / self.p_star);
        u.iter_mut().for_each(|x| *x *= c);
        Ok(())
    }
}

/// Vector quotient `(‖u‖^p + ‖v‖^p) / (Δ Σ (|u|^q + |v|^q + γ|u|^a|v|^b))^{p/q}`.
///
/// The state is `[u, v]` concatenated.
#[derive(Debug, Clone)]
pub struct VectorQuotient {
    lattice: Lattice,
    p: f64,
    gamma: f64,
    q: f64,
    a: f64,
    b: f64,
}

impl VectorQuotient {
    pub fn new(lattice: Lattice, params: &ParamSet, gamma: f64, eps_shift: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!("gamma = {gamma} must be nonnegative")));
        }
        let (q, a, b) = shifted_exponents(params, eps_shift)?;
        Ok(Self {
            lattice,
            p: params.p(),
            gamma,
            q,
            a,
            b,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn split<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        x.split_at(self.lattice.grid().n())
    }

    pub fn denominator(&self, x: &[f64]) -> f64 {
        let (u, v) = self.split(x);
        coupled_sum(u, v, self.gamma, self.q, self.a, self.b, self.lattice.grid().delta())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let (u, v) = self.split(x);
        let num = self.lattice.seminorm(u) + self.lattice.seminorm(v);
        num / self.denominator(x).powf(self.p / self.q)
    }

    pub fn value_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let grid = self.lattice.grid();
        let delta = grid.delta();
        let n = grid.n();
        let (u, v) = self.split(x);
        let (au, lu) = self.lattice.energy_and_apply(u);
        let (av, lv) = self.lattice.energy_and_apply(v);
        let num = au + av;
        let d = self.denominator(x);
        let scale = self.p * delta * d.powf(-self.p / self.q);
        let ratio = num / d;
        let (q, a, b, g) = (self.q, self.a, self.b, self.gamma);
        let mut grad = vec![0.0; 2 * n];
        for i in 0..n {
            if !grid.is_free(i) {
                continue;
            }
            let (ui, vi) = (u[i], v[i]);
            let cu = if g != 0.0 { g * a / q * spow(ui, a) * vi.abs().powf(b) } else { 0.0 };
            let cv = if g != 0.0 { g * b / q * spow(vi, b) * ui.abs().powf(a) } else { 0.0 };
            grad[i] = scale * (lu[i] - ratio * (spow(ui, q) + cu));
            grad[n + i] = scale * (lv[i] - ratio * (spow(vi, q) + cv));
        }
        (num / d.powf(self.p / self.q), grad)
    }

    pub fn normalize(&self, x: &mut [f64]) -> Result<()> {
        let d = self.denominator(x);
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Precondition("cannot normalize a zero pair".into()));
        }
        let c = d.powf(-1.0 / self.q);
        x.iter_mut().for_each(|y| *y *= c);
        Ok(())
    }
}

/// `‖u‖^p / (Δ Σ |u|^{p*})^{p/p*}`.
pub fn scalar_quotient(u: &DiscreteFunction, params: &ParamSet) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::Precondition("quotient of the zero function".into()));
    }
    let q = ScalarQuotient::new(Lattice::new(u.grid(), params)?, params);
    Ok(q.value(u.values()))
}

/// Vector quotient with coupling `γ` and exponent shift `ε`.
pub fn vector_quotient(
    u: &DiscreteFunction,
    v: &DiscreteFunction,
    gamma: f64,
    eps_shift: f64,
    params: &ParamSet,
) -> Result<f64> {
    if u.grid() != v.grid() {
        return Err(Error::Grid("u and v live on different lattices".into()));
    }
    if u.is_zero() && v.is_zero() {
        return Err(Error::Precondition("quotient of the zero pair".into()));
    }
    let q = VectorQuotient::new(Lattice::new(u.grid(), params)?, params, gamma, eps_shift)?;
    let x: Vec<f64> = u.values().iter().chain(v.values()).copied().collect();
    Ok(q.value(&x))
}
