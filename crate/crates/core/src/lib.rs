//! Adaptive detection of range-spread targets in subspace interference when
//! training data are scarce.
//!
//! The crate covers the whole simulation chain:
//!
//! - [`model`]: scenario configuration, the exponentially correlated scale
//!   matrix Σ and Doppler steering subspaces Φ (signal) and Υ (interference).
//! - [`synth`]: inverse-Wishart covariance draws and H₀/H₁ trial synthesis.
//! - [`detect`]: the Bayesian Rao detector (B-Rao-I), the Bayesian and
//!   ordinary GLRT / two-step GLRT with interference rejection, a Bayesian
//!   Wald form, and the MAP estimators they are built from.
//! - [`mc`]: threshold calibration, PD/PFA estimation, SNR sweeps and CFAR scans.
//! - [`cli`]: experiment files, CSV/JSON/SVG output and complex matrix I/O.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod detect;
pub mod error;
pub mod linalg;
pub mod mc;
pub mod model;
pub mod selftest;
pub mod synth;

pub use error::{Error, Result};
