use super::grid::{DiscreteFunction, Grid1D};
use crate::error::{Error, Result};
use crate::exponents::{ParamSet, EQ_TOL};

/// `(1 + |x/t|^{p/(p−1)})^{(sp−N)/p}` sampled on `grid`.
///
/// For `p = 2` this is the known extremal family; for other `p` it is only
/// a conjectured shape and a convenient starting point.
pub fn conjectured_profile(grid: &Grid1D, t: f64, params: &ParamSet) -> Result<DiscreteFunction> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("scale t = {t} must be positive")));
    }
    let p = params.p();
    let r = p / (p - 1.0);
    let e = (params.s() * p - params.dim()) / p;
    DiscreteFunction::from_fn(grid.clone(), |x| (1.0 + (x / t).abs().powf(r)).powf(e))
}

/// `(1 + |x/t|²)^{(2s−N)/2}`; needs `p = 2`.
pub fn talenti_profile(grid: &Grid1D, t: f64, params: &ParamSet) -> Result<DiscreteFunction> {
    if (params.p() - 2.0).abs() > EQ_TOL {
        return Err(Error::Domain(format!(
            "the p = 2 extremal family needs p = 2, got {}",
            params.p()
        )));
    }
    conjectured_profile(grid, t, params)
}
