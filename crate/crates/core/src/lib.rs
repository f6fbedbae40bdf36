//! Interval-bound feasible sets for linear inverse problems whose forward
//! operator is only known up to elementwise lower and upper bounds.
//!
//! Uncertainty in the operator and in the data is described by order
//! intervals `A^l <= A <= A^u` and `f^l <= f <= f^u`. The crate provides
//!
//! - [`operators`]: blur matrices, operator perturbation, interval and
//!   midpoint representations of the uncertainty;
//! - [`lattice`]: membership in the feasible sets `U`, `U_{h,δ}` and `U**`,
//!   witness construction and a Farkas/simplex oracle;
//! - [`tightening`]: bound tightening under a linear side constraint `Av = g`;
//! - [`lp`]: a small dense two-phase simplex used as an oracle;
//! - [`solver`]: a primal-dual solver for TV minimisation over `U`;
//! - [`metrics`]: PSNR and SSIM;
//! - [`phantom`] and [`pipeline`]: procedural test images and the
//!   exact / noisy-operator / interval deblurring comparison.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
mod grid;
mod math;
mod sparse;

pub mod lattice;
pub mod lp;
pub mod metrics;
pub mod operators;
pub mod phantom;
pub mod pipeline;
pub mod solver;
pub mod tightening;

pub use error::{Error, Result};
pub use grid::ImageGrid;
pub use sparse::SparseMatrix;
