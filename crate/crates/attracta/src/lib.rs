//! Numerical integration of non-autonomous systems of delay differential
//! equations with distributed delays in the normalized form
//!
//! ```text
//! dX/dt = G(t) [ integral of F(X(tau)) against d_tau R(t, tau) - X(t) ]
//! ```
//!
//! together with machine-checkable global-attractivity certificates:
//! the M-matrix contraction test with witness vector and nested boxes, the
//! planar monotone bracketing test, and the Nicholson-type per-equation
//! contraction test. Certificates are cross-validated by simulation under
//! multiple admissible delay configurations.
//!
//! Entry points:
//! - [`model`]: delay distributions, systems, histories, trajectories
//! - [`integrator`]: method-of-steps integration with dense output
//! - [`certifier`]: the three certificate families
//! - [`zoo`]: builders for the concrete model families
//! - [`config`]: JSON system descriptions
//! - [`repro`]: delay sweeps and the bundled worked examples

// validation code deliberately writes `!(x > 0.0)` so NaN fails closed
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certifier;
pub mod config;
pub mod error;
pub mod integrator;
pub mod model;
pub mod numeric;
pub mod par;
pub mod repro;
pub mod zoo;

pub use error::{Error, Result};
