//! Powered maxima of bivariate Gaussian triangular arrays: limit laws,
//! second-order expansions, exact finite-`n` laws and simulation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod expansions;
pub mod finite_law;
pub mod hr;
pub mod montecarlo;
pub mod norming;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
