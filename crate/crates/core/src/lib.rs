//! Simulation of Loewner traces with the Ninomiya–Victoir splitting scheme.
//!
//! The reverse Loewner flow `dZ = -2/Z dt + sqrt(kappa) dB` is advanced by
//! composing the exact drift flow over half a step, a real translation by the
//! driving increment, and another exact half-step. One pass over the driving
//! increments yields a whole trace in `O(M)` work.
//!
//! Crate layout:
//!
//! * [`driving`] samples standard, noise-reinforced and fractional Brownian
//!   driving paths and interpolates them.
//! * [`halfplane`] holds the upper-half-plane square root and slit maps.
//! * [`splitting`] is the scheme itself, in standard, noise-reinforced and
//!   fractional variants.
//! * [`reference`] contains independent solvers used to cross-check it.
//! * [`analysis`] measures trace distances, moments and fractal dimensions.
//! * [`io`] reads and writes the CSV, JSON and SVG formats.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod driving;
pub mod ensemble;
mod error;
pub mod halfplane;
pub mod io;
pub mod reference;
pub mod rng;
pub mod splitting;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// A point of the closed upper half-plane; the state of every flow.
pub type ComplexPoint = Complex64;

/// Version string recorded in output metadata.
pub const GENERATOR_VERSION: &str = concat!("sle-core ", env!("CARGO_PKG_VERSION"));
