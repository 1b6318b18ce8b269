//! Numerical kernels for quasilinear Neumann-wave problems posed outside a
//! convex obstacle in three space dimensions.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! file system, threads or the command line lives in the `nullwave` crate.
//!
//! Layout:
//! - [`geometry`]: obstacle profile, cutoff, boundary-flattening map.
//! - [`nullform`]: coefficient tensors of the nonlinearity and the null /
//!   admissible-boundary checkers.
//! - [`initial`]: initial data and compatibility functions.
//! - [`solver`]: radial and flattened 3-D leapfrog solvers, spherical oracle.
//! - [`diagnostics`]: vector fields, energies, weighted norms, decay fits.
//! - [`chaplygin`]: Chaplygin-gas potential flow on top of the solver.
#![no_std]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;


pub mod chaplygin;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod initial;
pub mod linalg;
pub mod nullform;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
