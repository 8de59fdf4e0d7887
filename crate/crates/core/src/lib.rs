//! Monitored recurrence of finite-dimensional subspaces under a unitary step.
//!
//! A subspace `V` is measured after every step; `a_n` is the amplitude of the
//! first return at step `n`. From these one gets the return probability
//! operator `R = Σ a_n†a_n`, the expected return time operator
//! `τ = Σ n a_n†a_n`, the integer `K = Tr τ` for recurrent subspaces, and the
//! operator-valued Schur function `f` with `â(z) = z f†(z)`.
//!
//! Modules:
//! - [`linops`]: state spaces, local step operators, lattice builders.
//! - [`monitor`]: amplitudes, renewal, `R`, `τ`, `K`, spectral data.
//! - [`schur`]: scalar Schur functions, Szegő polynomials, winding numbers.
//! - [`site1d`]: closed forms for site recurrence of coined walks on 1D lattices.
//! - [`walk2d`]: streaming driver for the square and hexagonal walks.
//! - [`verify`]: randomized property suites.

pub mod error;
pub mod linops;
pub mod monitor;
pub mod numeric;
pub mod schur;
pub mod site1d;
pub mod verify;
pub mod walk2d;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
