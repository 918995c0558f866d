//! Clipped proximal stochastic methods with learned gradient shifts for
//! composite minimization and variational inequalities under heavy-tailed
//! noise, plus a simulated distributed harness.

pub mod error;
pub mod exact;
pub mod harness;
pub mod linalg;
pub mod noise;
pub mod operators;
pub mod params;
pub mod problems;
pub mod solvers;
pub mod trace;

pub use error::{Error, Result};
