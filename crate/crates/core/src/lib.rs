//! Numerical structure of doubly-critical fractional p-Laplacian systems.
//!
//! The crate is layered:
//!
//! * [`exponents`]: admissible tuples `(N, s, p, α, β)` and their regimes.
//! * [`coupling`]: the coupling function `h`, the root equation `g` and the
//!   classification of `τ_min`, plus the synchronized coefficients `(λ, μ)`.
//! * [`algebraic`]: the `γ`-coupled algebraic system in `(k, ℓ)`, its
//!   thresholds, roots, least-energy value and the branch near `γ = 0`.
//! * [`gagliardo`]: a one-dimensional lattice discretization of the
//!   Gagliardo seminorm and the Rayleigh quotients built on it.
//! * [`verify`]: the property suites behind `critcouple verify`.
//!
//! The guide in `book/` walks through each layer; its code listings are
//! compiled and run as doc-tests of this crate.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebraic;
pub mod coupling;
pub mod error;
pub mod exponents;
pub mod gagliardo;
pub mod roots;
pub mod verify;

pub use error::{Error, Result};
pub use exponents::{ParamSet, Regime};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/exponents.md")]
    mod exponents {}
    #[doc = include_str!("../../../book/src/coupling.md")]
    mod coupling {}
    #[doc = include_str!("../../../book/src/algebraic.md")]
    mod algebraic {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
