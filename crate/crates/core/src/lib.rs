//! Numerical laboratory for semilinear SDEs driven by two-sided Lévy noise.
//!
//! The crate simulates mild solutions on a jump-adapted grid, approximates the
//! unique L²-bounded solution by pullback, evaluates the explicit constants and
//! Lipschitz thresholds of the existence/stability theory, and measures
//! recurrence both pathwise (Bebutov metric, ε-almost periods) and in
//! distribution (bounded-Lipschitz metric on empirical laws).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod ensemble;
pub mod error;
pub mod integrator;
pub mod model;
pub mod noise;
pub mod pullback;
pub mod recurrence;
pub mod seed;
pub mod stability;

pub use error::{Error, Result};
