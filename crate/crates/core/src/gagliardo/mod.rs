//! One-dimensional lattice model of the Gagliardo seminorm.
//!
//! Functions live on a uniform cell-centered grid of `[−L, L]` and vanish
//! outside it. The seminorm is
//!
//! ```text
//! ‖u‖^p = Σ_{i≠j} |u_i − u_j|^p |x_i − x_j|^{−1−sp} Δ² + 2Δ Σ_i |u_i|^p w_i
//! ```
//!
//! where `w_i` is the exact interaction of cell `i` with the exterior of
//! `[−L, L]`. Only `N = 1` is supported here.

mod energy;
mod grid;
mod kernel;
mod optimize;
mod profiles;
mod quotient;

pub use energy::{
    el_residual_system, j_energy, nehari_project, nehari_project_eps, nehari_residual,
    normalize_pair, normalize_to_solution, NehariProjection,
};
pub use grid::{DiscreteFunction, Grid1D, MIN_CELLS};
pub use kernel::{frac_p_laplacian_apply, seminorm_p, Lattice};
pub use optimize::{
    minimize_scalar, minimize_vector, symmetric_rearrangement, OptimizerOptions, RayleighResult,
    StopReason,
};
pub use profiles::{conjectured_profile, talenti_profile};
pub use quotient::{scalar_quotient, shifted_exponents, vector_quotient, ScalarQuotient, VectorQuotient};

/// Default number of cells.
pub const DEFAULT_N: usize = 128;

/// Default half-width `L`.
pub const DEFAULT_HALF_WIDTH: f64 = 20.0;
