use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// KL(N(mean_a, cov_a) ‖ N(mean_b, cov_b)).
///
/// Uses the eigenvalues μ_i of L_b⁻¹(Σ_a − Σ_b)L_b⁻ᵀ, for which the divergence is
/// ½Σ(μ_i − log(1 + μ_i)) + ½‖L_b⁻¹(μ_a − μ_b)‖². Forming the difference first keeps
/// small divergences accurate when both covariances are ill conditioned.
pub fn kl_divergence(mean_a: &DVector<f64>, cov_a: &DMatrix<f64>, mean_b: &DVector<f64>, cov_b: &DMatrix<f64>) -> Result<f64> {
    let n = mean_a.len();
    for (len, what) in [(mean_b.len(), n), (cov_a.nrows(), n), (cov_a.ncols(), n), (cov_b.nrows(), n), (cov_b.ncols(), n)] {
        if len != what {
            return Err(Error::Dimension { expected: what, got: len });
        }
    }
    if n == 0 {
        return Ok(0.0);
    }
    if cov_a.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite { pivot: 0 });
    }
    let lb = cov_b.clone().cholesky().ok_or(Error::NotPositiveDefinite { pivot: 0 })?.l();
    let diff = cov_a - cov_b;
    let diff = 0.5 * (&diff + diff.transpose());
    let left = lb.solve_lower_triangular(&diff).ok_or(Error::NotPositiveDefinite { pivot: 0 })?;
    let m = lb.solve_lower_triangular(&left.transpose()).ok_or(Error::NotPositiveDefinite { pivot: 0 })?;
    let m = 0.5 * (&m + m.transpose());
    let eig = SymmetricEigen::new(m);
    let mut trace_term = 0.0;
    for &mu in eig.eigenvalues.iter() {
        if !(mu > -1.0) {
            return Err(Error::NotPositiveDefinite { pivot: 0 });
        }
        trace_term += mu - mu.ln_1p();
    }
    let delta = lb.solve_lower_triangular(&(mean_a - mean_b)).ok_or(Error::NotPositiveDefinite { pivot: 0 })?;
    Ok(0.5 * (trace_term + delta.norm_squared()))
}
