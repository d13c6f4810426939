//! Angular parameter estimation for multiple incoherently distributed (ID)
//! sources emitting noncircular signals.
//!
//! The crate is organised bottom-up:
//!
//! * [`array`] – sensor geometry, steering and extended steering vectors.
//! * [`sources`] – angular power densities, source descriptions and two
//!   independent snapshot synthesizers.
//! * [`covariance`] – spread factor matrices `T`/`T'`, model and sample
//!   extended covariances, inverse-square block extraction.
//! * [`estimator`] – the compressed-cost 2-D search and the
//!   distribution-agnostic two-stage (DOA, then spread) estimator.
//! * [`analysis`] – analytical bias/covariance/MSE prediction.
//! * [`crlb`] – stochastic Fisher information and Cramér–Rao bounds for the
//!   noncircular and circular data models.
//! * [`harness`] – experiment configuration, seeded Monte Carlo, CSV/SVG output.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod array;
pub mod covariance;
pub mod crlb;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod linalg;
pub mod sources;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;
/// Dense real matrix.
pub type RMat = nalgebra::DMatrix<f64>;
/// Dense real column vector.
pub type RVec = nalgebra::DVector<f64>;

/// Degrees to radians.
#[inline]
pub fn deg(x: f64) -> f64 {
    x.to_radians()
}
