//! Control of basins of attraction in parameterised ODE systems.
//!
//! The crate finds and continues equilibria, computes parametric
//! sensitivities of eigenvalues and saddle distances, combines several
//! objectives with the minimum-norm hull point, and estimates basin volumes
//! by Monte Carlo integration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basin;
pub mod control;
pub mod dynsys;
pub mod equilibria;
pub mod error;
pub mod mgda;
pub mod models;
pub mod oracle;
pub mod sensitivity;

pub use error::{Error, Result};
