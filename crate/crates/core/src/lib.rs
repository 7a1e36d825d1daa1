//! Builds toric steady Kähler soliton metrics on `C^n` from one-variable
//! profile functions and checks them numerically.
//!
//! The crate is organised by task:
//! - [`symfun`]: symmetric functions, polynomials, interpolation, quadrature;
//! - [`profiles`]: the profile functions and admissibility;
//! - [`ansatz`]: the Kähler structure, moment map and symplectic potential;
//! - [`toric`]: toric tools (cones, Monge–Ampère residual, boundary data);
//! - [`curvature`]: finite-difference and closed-form curvature;
//! - [`analysis`]: volume growth, distance proxy and soliton vector data;
//! - [`record`] and [`config`]: text and JSON formats used by the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod ansatz;
pub mod config;
pub mod curvature;
pub mod error;
pub mod profiles;
pub mod record;
pub mod symfun;
pub mod toric;

pub use error::{Error, Result};
