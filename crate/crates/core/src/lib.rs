//! Certified numerics for Turán-type lower bounds on sums of Gaussian
//! translates.
//!
//! For a spacing `λ > 0` the crate builds an explicit network
//! `P(x) = Σ_{|k|<=n} c_k e^{-(x-λk)²}` and certifies
//! `‖P'‖∞ / ‖P‖∞ >= π²/(2¹⁰ λ)`, together with the quantitative ingredients
//! behind it: closed-form Fourier coefficients, the oscillation of `P̂` on a
//! frequency window, decay envelopes, and frame bounds for translate systems.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coefficients;
pub mod error;
pub mod frames;
pub mod kernels;
pub mod norms;
pub mod oscillation;
pub mod quadrature;
pub mod witness;

pub use error::{CertError, Result};
