//! Numerical checks of the positive mass theorem for asymptotically flat
//! manifolds with boundary, on rotationally symmetric metrics.
//!
//! The crate solves the conformal and harmonic Green's function problems on
//! `R^n` minus a ball, evaluates the sharp mean-curvature boundary
//! conditions, builds the conformal fill-in and compares masses with
//! capacity-type constants. Schwarzschild metrics provide closed-form
//! equality cases throughout.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod conformal;
pub mod elliptic;
pub mod error;
pub mod geometry;
pub mod numerics;
pub mod theorems;

pub use error::{Error, Result};
