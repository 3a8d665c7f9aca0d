//! Simulation and verification toolkit for stochastic scalar conservation
//! laws on the periodic unit interval.
//!
//! The crate solves three related equations on a shared finite-volume grid:
//!
//! * the scaled SPDE `du + ε ∂ₓA(u) dt = √ε Σₖ gₖ(x,u) dβₖ`,
//! * its flux-free companion `dv = √ε Σₖ gₖ(x,v) dβₖ`,
//! * the controlled skeleton `du = Σₖ gₖ(x,u) hₖ(t) dt`,
//!
//! and provides kinetic (doubling-of-variables) diagnostics, Monte Carlo
//! tail and moment estimators, and a penalty-method estimator for the
//! small-noise rate function.

pub mod error;
pub mod harness;
pub mod kinetic;
pub mod model;
pub mod rate;
pub mod solvers;

pub use error::{Error, Result};
