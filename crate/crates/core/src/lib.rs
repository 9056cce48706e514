//! Numerical checks for matrix monotonicity of free functions over concrete operator systems.
//!
//! A free function is monotone for the semidefinite order exactly when it continues to a map
//! from the noncommutative upper half-plane into its closure. This crate evaluates both sides
//! independently on sampled matrix points and reports agreement or a concrete witness.

// NaN-rejecting comparisons are written as negations on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expr;
pub mod linalg;
pub mod loewner1d;
pub mod opsys;
pub mod suite;
pub mod verifiers;

pub use error::{Error, Result};
