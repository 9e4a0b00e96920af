//! Numerical workbench for Hardy and Hardy–Sobolev inequalities with cylindrical weights
//! `|y|^a`, `x = (y, z) ∈ ℝ^k × ℝ^{N−k}`.
//!
//! Functions are radial in `y` and in `z` separately and live on [`grid::CylGrid`]s. The
//! crate evaluates the weighted quotients, reproduces the sharp Hardy constant along its
//! extremal families, symmetrizes grid functions and minimizes the Hardy–Sobolev quotient.

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod minimizer;
pub mod rearrange;
pub mod sharp_constant;

pub use error::{Error, Result, Violation};
pub use functionals::{hardy_quotient, hs_constraint, hs_quotient, Mode, Params, QuotientReport};
pub use grid::{CylGrid, Grading, GridFunction, GridSpec, RadialGrid};
pub use minimizer::{minimize_hs, DescentOptions, Init, MinimizationTrace};
