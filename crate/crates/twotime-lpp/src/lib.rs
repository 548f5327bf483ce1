//! Two-time distribution of geometric last-passage percolation, computed three
//! ways: Monte-Carlo simulation of the lattice model, the exact finite-N
//! determinant formula in rational arithmetic, and the scaling-limit formula as
//! a contour integral of Fredholm determinants.
//!
//! The pieces cross-validate one another; see `examples/` for one runnable
//! walk-through per capability and `tests/acceptance.rs` for the numeric
//! acceptance criteria.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airy;
pub mod cli;
pub mod contour;
mod dd;
pub mod error;
pub mod finite_n;
pub mod fredholm;
pub mod kernels;
pub mod lpp_sim;
pub mod quadrature;
pub mod scaling;
pub mod twotime;
pub mod verify;

pub use error::{Error, Result};
pub use num::complex::Complex64;
