//! Littlewood-Paley theory for the barrier Schrödinger operator
//! `H = -d²/dx² + eps²·chi_[-1,1]` on the real line.
//!
//! The crate computes, at desk scale and with controlled quadrature:
//!
//! - the closed-form scattering eigenfunctions of `H` and their
//!   transmission/reflection data ([`eigen`]), cross-checked against an
//!   independent transfer-matrix solver ([`transfer_matrix`]);
//! - smooth dyadic systems `(Phi, phi, Psi, psi)` with exact partition of
//!   unity ([`dyadic`]);
//! - the generalized Fourier transform diagonalizing `H`, its adjoint, and
//!   the functional calculus `m(H)` with explicit integral kernels
//!   ([`transform`]);
//! - Besov quasi-norms adapted to `H`, Peetre maximal functions with the
//!   barrier's reflected-shift denominators, and norm-equivalence
//!   experiments ([`besov`]);
//! - empirical verification of the kernel-decay, kernel-size, Hörmander,
//!   and spectral-multiplier estimates ([`verify`]);
//! - the propagator `e^{-itH}` by spectral calculus and by Crank-Nicolson
//!   time stepping ([`evolve`]);
//! - an FFT pipeline for the free operator used as the classical
//!   comparison point ([`classical`]).
//!
//! The companion book under `book/` walks through the theory with runnable
//! snippets; the [`barrier-lp` CLI](../barrier_lp_cli/index.html) exposes
//! each experiment as a subcommand.

pub mod besov;
pub mod classical;
pub mod dyadic;
pub mod eigen;
pub mod error;
pub mod evolve;
pub mod functions;
pub mod grid;
pub mod potential;
pub mod transfer_matrix;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use potential::BarrierPotential;

// The book's code blocks double as doc-tests so the guide can never drift
// from the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/eigenfunctions.md")]
    mod eigenfunctions {}
    #[doc = include_str!("../../../book/src/dyadic-systems.md")]
    mod dyadic_systems {}
    #[doc = include_str!("../../../book/src/transform.md")]
    mod transform {}
    #[doc = include_str!("../../../book/src/besov-norms.md")]
    mod besov_norms {}
    #[doc = include_str!("../../../book/src/kernel-estimates.md")]
    mod kernel_estimates {}
    #[doc = include_str!("../../../book/src/multipliers.md")]
    mod multipliers {}
    #[doc = include_str!("../../../book/src/propagator.md")]
    mod propagator {}
}
