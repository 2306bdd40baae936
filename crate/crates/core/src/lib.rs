//! Exact distribution, moments, mode, and vanishing-drift asymptotics of the
//! leftmost visited site of the transient frog model on the integers, with
//! exact Monte Carlo samplers cross-validating every closed form.
//!
//! Modules:
//! - [`qseries`]: q-Pochhammer, q-gamma/q-digamma, zeta, the Euler-function
//!   asymptotic — all with certified truncation error.
//! - [`bellpoly`]: partial/complete Bell polynomials and the
//!   cumulant-to-moment transform.
//! - [`distribution`]: the closed-form law of the range minimum for
//!   single-frog and general configurations.
//! - [`simulator`]: seeded, reproducible Monte Carlo (parallel with the
//!   `parallel` feature, identical results without it).
//! - [`range_bounds`]: moment bounds and block probabilities for
//!   configurations supported on all of Z.

pub mod bellpoly;
pub mod distribution;
pub mod error;
pub mod qseries;
pub mod range_bounds;
pub mod simulator;

pub use error::{Error, Result};
