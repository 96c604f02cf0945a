//! Band matrices, band factorizations, and the sparse precision structure of
//! the Markov components.

mod band;
mod precision;

pub use band::{band_cholesky, band_ldl, band_solve, band_solve_matrix, selected_inverse, BandFactor, BandMatrix, FactorForm};
pub use precision::{assemble_precision, blocktridiag_to_band, ldl_construct, BlockTridiagPrecision, MIN_SPACING};
