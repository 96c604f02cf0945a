//! Markov approximations of Matérn Gaussian processes on an interval.
//!
//! A Matérn field with non-integer smoothness α is approximated by a sum of
//! m + 1 independent Gaussian Markov processes, obtained from the best rational
//! approximation of the fractional part of its spectral density. Each component
//! has a block-tridiagonal precision, so sampling, regression and likelihood
//! evaluation run in time linear in the number of locations.

pub mod banded;
pub mod decomposition;
pub mod error;
pub mod gp;
pub mod kernels;
pub mod oracle;
pub mod quadrature;
pub mod rational;

pub use error::{Error, Result};
