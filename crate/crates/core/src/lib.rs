//! Estimation in the Gaussian multiplex channel.
//!
//! `N` sensor outputs are summed through a bank of switches into a single
//! integrator observed in white Gaussian noise. A switch schedule is a
//! binary matrix `B` plus per-row observation times `T` with `Tr T = N`;
//! the ML estimate of the sensor means has covariance `(BᵀTB)⁻¹`, so the
//! schedule is scored by `Tr (BᵀTB)⁻¹`.
//!
//! - [`model`]: designs, Fisher information, ML estimation, MSE.
//! - [`designs`]: identity, complement, individual+joint, single-k and
//!   multi-k families with closed-form costs.
//! - [`hadamard`]: Hadamard matrices and the square optimal designs.
//! - [`analysis`]: optimal `k`, convex-combination sweeps, majorization
//!   certificates and the global optimum.
//! - [`sim`]: seeded Monte Carlo validation of the estimator.
//! - [`figures`]: tabular data behind the standard plots.
//! - [`cli`]: the `gmux` command line front end.

// index loops mirror the matrix notation; `!(x > y)` is kept where NaN must fail
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod designs;
pub mod error;
pub mod figures;
pub mod hadamard;
pub mod linalg;
pub mod model;
pub mod sim;

pub use error::{Error, Result};
pub use model::{Design, FisherInfo, Observation, Spectrum};
