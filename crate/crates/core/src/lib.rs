//! Simulation of 1D waves in a bound potential with a rapidly oscillating,
//! possibly complex, amplitude: i ψ_t = -ψ_xx + f(t) V(x) ψ.
//!
//! Time-domain split-step propagation, effective-potential averaging and a
//! frequency-domain Floquet sideband solver live side by side so each can
//! check the others.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod floquet;
pub mod grid;
pub mod modulation;
pub mod potential;
pub mod propagator;
pub mod reference;
pub mod scenario;

pub use error::{Error, Result};
pub use num_complex::Complex64;
