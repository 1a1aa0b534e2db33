//! Euler–Lagrange residuals, the energy `J` and Nehari projections.

use super::grid::DiscreteFunction;
use super::kernel::{spow, Lattice};
use super::quotient::{coupled_sum, shifted_exponents};
use crate::error::{Error, Result};
use crate::exponents::ParamSet;

fn same_grid(u: &DiscreteFunction, v: &DiscreteFunction) -> Result<()> {
    if u.grid() != v.grid() {
        return Err(Error::Grid("u and v live on different lattices".into()));
    }
    Ok(())
}

/// Right-hand sides of the coupled system at `(u, v)`:
/// `|u|^{p*−2}u + (αγ/p*)|u|^{α−2}u|v|^β` and its mirror.
fn system_rhs(u: &[f64], v: &[f64], gamma: f64, params: &ParamSet) -> (Vec<f64>, Vec<f64>) {
    let (a, b, ps) = (params.alpha(), params.beta(), params.p_star());
    let mut ru = Vec::with_capacity(u.len());
    let mut rv = Vec::with_capacity(v.len());
    for (&x, &y) in u.iter().zip(v) {
        let mut fu = spow(x, ps);
        let mut fv = spow(y, ps);
        if gamma != 0.0 {
            fu += a * gamma / ps * spow(x, a) * y.abs().powf(b);
            fv += b * gamma / ps * spow(y, b) * x.abs().powf(a);
        }
        ru.push(fu);
        rv.push(fv);
    }
    (ru, rv)
}

/// Relative residual of the coupled system
///
/// ```text
/// (−Δ)^s_p u = |u|^{p*−2}u + (αγ/p*)|u|^{α−2}u|v|^β
/// (−Δ)^s_p v = |v|^{p*−2}v + (βγ/p*)|v|^{β−2}v|u|^α
/// ```
///
/// measured over free cells against the norm of the operator part. Pass
/// `v ≡ 0`, `γ = 0` for the scalar equation.
pub fn el_residual_system(
    u: &DiscreteFunction,
    v: &DiscreteFunction,
    gamma: f64,
    params: &ParamSet,
) -> Result<f64> {
    same_grid(u, v)?;
    if u.is_zero() && v.is_zero() {
        return Err(Error::Precondition("residual of the zero pair".into()));
    }
    let lat = Lattice::new(u.grid(), params)?;
    let lu = lat.apply(u.values());
    let lv = lat.apply(v.values());
    let (ru, rv) = system_rhs(u.values(), v.values(), gamma, params);
    let grid = u.grid();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in (0..grid.n()).filter(|&i| grid.is_free(i)) {
        num += (lu[i] - ru[i]).powi(2) + (lv[i] - rv[i]).powi(2);
        den += lu[i].powi(2) + lv[i].powi(2);
    }
    Ok((num / den).sqrt())
}

/// Least-squares multiplier `Λ` in `apply(w) ≈ Λ·rhs(w)` over free cells.
fn fitted_multiplier(u: &[f64], v: &[f64], gamma: f64, lat: &Lattice, params: &ParamSet) -> f64 {
    let lu = lat.apply(u);
    let lv = lat.apply(v);
    let (ru, rv) = system_rhs(u, v, gamma, params);
    let grid = lat.grid();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in (0..grid.n()).filter(|&i| grid.is_free(i)) {
        num += lu[i] * ru[i] + lv[i] * rv[i];
        den += ru[i] * ru[i] + rv[i] * rv[i];
    }
    num / den
}

/// Rescales `(u, v)` by a common factor so that the fitted multiplier of
/// the coupled system becomes one.
pub fn normalize_pair(
    u: &DiscreteFunction,
    v: &DiscreteFunction,
    gamma: f64,
    params: &ParamSet,
) -> Result<(DiscreteFunction, DiscreteFunction)> {
    same_grid(u, v)?;
    if u.is_zero() && v.is_zero() {
        return Err(Error::Precondition("cannot normalize the zero pair".into()));
    }
    let lat = Lattice::new(u.grid(), params)?;
    let lambda = fitted_multiplier(u.values(), v.values(), gamma, &lat, params);
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Precondition(format!(
            "fitted multiplier {lambda} is not positive; input is not near a minimizer"
        )));
    }
    let c = lambda.powf(1.0 / (params.p_star() - params.p()));
    Ok((u.scaled(c), v.scaled(c)))
}

/// Rescales `u` so that `apply(u) ≈ |u|^{p*−2}u` with unit fitted multiplier.
pub fn normalize_to_solution(u: &DiscreteFunction, params: &ParamSet) -> Result<DiscreteFunction> {
    let zero = DiscreteFunction::zeros(u.grid().clone());
    normalize_pair(u, &zero, 0.0, params).map(|(w, _)| w)
}

/// `(1/p)(‖u‖^p + ‖v‖^p) − (1/q) Δ Σ (|u|^q + |v|^q + γ|u|^{α−ε}|v|^{β−ε})`
/// with `q = p* − 2ε`.
pub fn j_energy(
    u: &DiscreteFunction,
    v: &DiscreteFunction,
    gamma: f64,
    eps_shift: f64,
    params: &ParamSet,
) -> Result<f64> {
    same_grid(u, v)?;
    let (q, a, b) = shifted_exponents(params, eps_shift)?;
    let lat = Lattice::new(u.grid(), params)?;
    let kinetic = lat.seminorm(u.values()) + lat.seminorm(v.values());
    let potential = coupled_sum(u.values(), v.values(), gamma, q, a, b, u.grid().delta());
    Ok(kinetic / params.p() - potential / q)
}

/// Result of a Nehari projection.
#[derive(Debug, Clone, PartialEq)]
pub struct NehariProjection {
    pub t: f64,
    pub u: DiscreteFunction,
    pub v: DiscreteFunction,
}

/// Scales `(u, v)` onto the single-constraint Nehari set
/// `‖u‖^p + ‖v‖^p = Δ Σ (|u|^{p*} + |v|^{p*} + γ|u|^α|v|^β)`.
pub fn nehari_project(
    u: &DiscreteFunction,
    v: &DiscreteFunction,
    gamma: f64,
    params: &ParamSet,
) -> Result<NehariProjection> {
    nehari_project_eps(u, v, gamma, 0.0, params)
}

/// [`nehari_project`] for the shifted exponents `q = p* − 2ε`.
pub fn nehari_project_eps(
    u: &DiscreteFunction,
    v: &DiscreteFunction,
    gamma: f64,
    eps_shift: f64,
    params: &ParamSet,
) -> Result<NehariProjection> {
    same_grid(u, v)?;
    let (q, a, b) = shifted_exponents(params, eps_shift)?;
    let lat = Lattice::new(u.grid(), params)?;
    let kinetic = lat.seminorm(u.values()) + lat.seminorm(v.values());
    let potential = coupled_sum(u.values(), v.values(), gamma, q, a, b, u.grid().delta());
    if !(potential > 0.0 && potential.is_finite()) {
        return Err(Error::Precondition(format!(
            "Nehari denominator {potential} is not positive"
        )));
    }
    let t = (kinetic / potential).powf(1.0 / (q - params.p()));
    Ok(NehariProjection {
        t,
        u: u.scaled(t),
        v: v.scaled(t),
    })
}

/// Signed Nehari constraint `‖u‖^p + ‖v‖^p − Δ Σ(…)`, relative to the
/// kinetic part.
pub fn nehari_residual(
    u: &DiscreteFunction,
    v: &DiscreteFunction,
    gamma: f64,
    eps_shift: f64,
    params: &ParamSet,
) -> Result<f64> {
    same_grid(u, v)?;
    let (q, a, b) = shifted_exponents(params, eps_shift)?;
    let lat = Lattice::new(u.grid(), params)?;
    let kinetic = lat.seminorm(u.values()) + lat.seminorm(v.values());
    let potential = coupled_sum(u.values(), v.values(), gamma, q, a, b, u.grid().delta());
    Ok((kinetic - potential) / kinetic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gagliardo::Grid1D;
    use approx::assert_relative_eq;

    fn params() -> ParamSet {
        ParamSet::from_alpha(1, 0.25, 1.8, 1.5).unwrap()
    }

    fn pair() -> (DiscreteFunction, DiscreteFunction) {
        let g = Grid1D::new(8.0, 64).unwrap();
        let u = DiscreteFunction::from_fn(g.clone(), |x| (1.0 + x * x).powf(-0.6)).unwrap();
        let v = DiscreteFunction::from_fn(g, |x| 0.5 * (-0.3 * x * x).exp()).unwrap();
        (u, v)
    }

    #[test]
    fn zero_pair_energy_and_residual() {
        let (u, _) = pair();
        let z = DiscreteFunction::zeros(u.grid().clone());
        assert_eq!(j_energy(&z, &z, 1.0, 0.0, &params()).unwrap(), 0.0);
        assert!(el_residual_system(&z, &z, 1.0, &params()).is_err());
        assert!(nehari_project(&z, &z, 1.0, &params()).is_err());
    }

    #[test]
    fn nehari_projection_properties() {
        let ps = params();
        let (u, v) = pair();
        let pr = nehari_project(&u, &v, 1.0, &ps).unwrap();
        assert!(nehari_residual(&pr.u, &pr.v, 1.0, 0.0, &ps).unwrap().abs() < 1e-12);
        let again = nehari_project(&pr.u, &pr.v, 1.0, &ps).unwrap();
        assert_relative_eq!(again.t, 1.0, max_relative = 1e-12);
        let scaled = nehari_project(&u.scaled(3.0), &v.scaled(3.0), 1.0, &ps).unwrap();
        assert_relative_eq!(scaled.t, pr.t / 3.0, max_relative = 1e-12);
        let lat = Lattice::new(u.grid(), &ps).unwrap();
        let kin = lat.seminorm(pr.u.values()) + lat.seminorm(pr.v.values());
        let j = j_energy(&pr.u, &pr.v, 1.0, 0.0, &ps).unwrap();
        assert_relative_eq!(j, ps.energy_factor() * kin, max_relative = 1e-12);
    }

    #[test]
    fn shifted_nehari_energy() {
        let ps = params();
        let (u, v) = pair();
        let eps = 0.1;
        let pr = nehari_project_eps(&u, &v, 0.7, eps, &ps).unwrap();
        let q = ps.p_star() - 2.0 * eps;
        let lat = Lattice::new(u.grid(), &ps).unwrap();
        let kin = lat.seminorm(pr.u.values()) + lat.seminorm(pr.v.values());
        let j = j_energy(&pr.u, &pr.v, 0.7, eps, &ps).unwrap();
        assert_relative_eq!(j, (1.0 / ps.p() - 1.0 / q) * kin, max_relative = 1e-12);
        assert!(j_energy(&u, &v, 0.7, 0.5, &ps).is_err());
    }

    #[test]
    fn normalization_is_idempotent_and_scale_free() {
        let ps = params();
        let (u, _) = pair();
        let w = normalize_to_solution(&u, &ps).unwrap();
        let w2 = normalize_to_solution(&w, &ps).unwrap();
        for (a, b) in w.values().iter().zip(w2.values()) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
        let w3 = normalize_to_solution(&u.scaled(2.0), &ps).unwrap();
        for (a, b) in w.values().iter().zip(w3.values()) {
            assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
        }
    }

    #[test]
    fn noise_has_large_residual() {
        let ps = params();
        let (u, v) = pair();
        let noisy: Vec<f64> = (0..64).map(|i| ((i * 37 % 11) as f64 - 5.0) / 5.0).collect();
        let n = DiscreteFunction::new(u.grid().clone(), noisy).unwrap();
        let (a, b) = normalize_pair(&u, &v, 1.0, &ps).unwrap();
        assert!(el_residual_system(&a, &b, 1.0, &ps).unwrap() > 1e-3);
        assert!(el_residual_system(&n, &v, 1.0, &ps).unwrap() > 0.1);
    }
}
