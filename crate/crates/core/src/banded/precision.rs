//! Block-tridiagonal precision matrices of Markov components and their direct
//! LDL construction from local covariances.

use nalgebra::{DMatrix, DVector};

use super::band::{BandFactor, BandMatrix, FactorForm};
use crate::decomposition::CrossCovSpec;
use crate::error::{Error, Result};

/// Relative spacing below which two locations count as duplicates.
pub const MIN_SPACING: f64 = 1e-10;

/// Precision of the stacked states [x(t_1), ..., x(t_n)] of a p-dimensional
/// first-order Markov process; block row j couples only to j ± 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiagPrecision {
    pub n: usize,
    pub p: usize,
    pub diag: Vec<DMatrix<f64>>,
    /// offdiag[j] = Q_{j, j+1}.
    pub offdiag: Vec<DMatrix<f64>>,
    pub locations: Vec<f64>,
}

impl BlockTridiagPrecision {
    /// Dense np×np matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let (n, p) = (self.n, self.p);
        let mut q = DMatrix::zeros(n * p, n * p);
        for j in 0..n {
            q.view_mut((j * p, j * p), (p, p)).copy_from(&self.diag[j]);
            if j + 1 < n {
                q.view_mut((j * p, (j + 1) * p), (p, p)).copy_from(&self.offdiag[j]);
                q.view_mut(((j + 1) * p, j * p), (p, p)).copy_from(&self.offdiag[j].transpose());
            }
        }
        q
    }
}

/// Checks for strictly monotone, well-separated locations.
fn check_locations(locations: &[f64]) -> Result<()> {
    if locations.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("locations must be finite".into()));
    }
    let n = locations.len();
    if n < 2 {
        return Ok(());
    }
    let span = (locations[n - 1] - locations[0]).abs();
    let sign = (locations[1] - locations[0]).signum();
    for j in 0..n - 1 {
        let gap = (locations[j + 1] - locations[j]) * sign;
        if !(gap > MIN_SPACING * span) {
            if gap < 0.0 {
                return Err(Error::InvalidArgument(format!("locations are not monotone at index {}", j + 1)));
            }
            return Err(Error::DuplicateLocations(j, j + 1));
        }
    }
    Ok(())
}

/// Joint covariance of the states at `ts`, built from precomputed blocks.
fn joint_cov(spec: &CrossCovSpec, ts: &[f64]) -> Result<DMatrix<f64>> {
    let p = spec.dim();
    let k = ts.len();
    let mut s = DMatrix::zeros(k * p, k * p);
    for a in 0..k {
        for b in a..k {
            let blk = spec.block(ts[a], ts[b])?;
            s.view_mut((a * p, b * p), (p, p)).copy_from(&blk);
            if a != b {
                s.view_mut((b * p, a * p), (p, p)).copy_from(&blk.transpose());
            }
        }
    }
    Ok(s)
}

/// Inverse of a small SPD matrix by Cholesky after symmetric diagonal scaling.
fn spd_inverse(s: &DMatrix<f64>, first: usize) -> Result<DMatrix<f64>> {
    let n = s.nrows();
    let mut scale = DVector::zeros(n);
    for i in 0..n {
        if !(s[(i, i)] > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: first });
        }
        scale[i] = 1.0 / s[(i, i)].sqrt();
    }
    let scaled = DMatrix::from_fn(n, n, |i, j| s[(i, j)] * scale[i] * scale[j]);
    let chol = scaled.cholesky().ok_or(Error::NotPositiveDefinite { pivot: first })?;
    let inv = chol.inverse();
    Ok(DMatrix::from_fn(n, n, |i, j| inv[(i, j)] * scale[i] * scale[j]))
}

/// Precision of a component's state vector at the given locations.
///
/// Boundary blocks come from the inverse joint covariance of the first two
/// locations; each later block row from the inverse over three consecutive
/// locations, whose leading rows are discarded.
pub fn assemble_precision(spec: &CrossCovSpec, locations: &[f64]) -> Result<BlockTridiagPrecision> {
    check_locations(locations)?;
    let n = locations.len();
    let p = spec.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("no locations".into()));
    }
    if n == 1 {
        let q = spd_inverse(&spec.block(locations[0], locations[0])?, 0)?;
        return Ok(BlockTridiagPrecision { n, p, diag: vec![q], offdiag: vec![], locations: locations.to_vec() });
    }
    let mut diag = vec![DMatrix::zeros(p, p); n];
    let mut offdiag = vec![DMatrix::zeros(p, p); n - 1];

    let q2 = spd_inverse(&joint_cov(spec, &locations[..2])?, 0)
        .map_err(|_| Error::DuplicateLocations(0, 1))
        .or_else(|e| near_duplicate_or(e, spec, locations, 0))?;
    diag[0] = q2.view((0, 0), (p, p)).into_owned();
    offdiag[0] = q2.view((0, p), (p, p)).into_owned();
    diag[1] = q2.view((p, p), (p, p)).into_owned();

    for j in 1..n - 1 {
        let q3 = spd_inverse(&joint_cov(spec, &locations[j - 1..j + 2])?, j - 1)
            .or_else(|e| near_duplicate_or(e, spec, locations, j - 1))?;
        diag[j] = q3.view((p, p), (p, p)).into_owned();
        offdiag[j] = q3.view((p, 2 * p), (p, p)).into_owned();
        diag[j + 1] = q3.view((2 * p, 2 * p), (p, p)).into_owned();
    }
    for d in diag.iter_mut() {
        *d = 0.5 * (&*d + d.transpose());
    }
    Ok(BlockTridiagPrecision { n, p, diag, offdiag, locations: locations.to_vec() })
}

/// A failed local factorization means either near-duplicate locations or a bad kernel.
fn near_duplicate_or<T>(err: Error, spec: &CrossCovSpec, locations: &[f64], j: usize) -> Result<T> {
    let _ = spec;
    match err {
        Error::DuplicateLocations(..) | Error::NotPositiveDefinite { .. } => {
            let end = (j + 3).min(locations.len());
            let gaps: Vec<f64> = locations[j..end].windows(2).map(|w| (w[1] - w[0]).abs()).collect();
            let k = if gaps.len() > 1 && gaps[1] < gaps[0] { j + 1 } else { j };
            let span = (locations[locations.len() - 1] - locations[0]).abs();
            if gaps.iter().cloned().fold(f64::INFINITY, f64::min) < 1e-6 * span {
                Err(Error::DuplicateLocations(k, k + 1))
            } else {
                Err(Error::NotPositiveDefinite { pivot: j })
            }
        }
        e => Err(e),
    }
}

/// Scalar layout of a block-tridiagonal precision, half-bandwidth 2p − 1.
pub fn blocktridiag_to_band(q: &BlockTridiagPrecision) -> BandMatrix {
    let (n, p) = (q.n, q.p);
    let bw = if n > 1 { 2 * p - 1 } else { p - 1 };
    let mut m = BandMatrix::zeros(n * p, bw);
    for j in 0..n {
        for a in 0..p {
            for b in 0..=a {
                m.set(j * p + a, j * p + b, q.diag[j][(a, b)]);
            }
        }
        if j + 1 < n {
            // Q_{j+1, j} = Q_{j, j+1}ᵀ sits below the diagonal
            for a in 0..p {
                for b in 0..p {
                    m.set((j + 1) * p + a, j * p + b, q.offdiag[j][(b, a)]);
                }
            }
        }
    }
    m
}

/// Regression of x_r on x_0..x_{r−1} under covariance s: (coefficients, residual variance).
fn conditional(s: &DMatrix<f64>, r: usize) -> Option<(DVector<f64>, f64)> {
    if r == 0 {
        return Some((DVector::zeros(0), s[(0, 0)]));
    }
    let scale: Vec<f64> = (0..=r).map(|i| s[(i, i)].sqrt()).collect();
    let a = DMatrix::from_fn(r, r, |i, j| s[(i, j)] / (scale[i] * scale[j]));
    let c = DVector::from_fn(r, |i, _| s[(r, i)] / (scale[r] * scale[i]));
    let chol = a.cholesky()?;
    let b = chol.solve(&c);
    let var = (1.0 - c.dot(&b)) * scale[r] * scale[r];
    let coef = DVector::from_fn(r, |i, _| b[i] * scale[r] / scale[i]);
    Some((coef, var))
}

/// Factor Q = Lᵀ D L of a component's precision, built one scalar state at a
/// time from its conditional distribution given everything before it.
///
/// Because the state process is first-order Markov, the past reduces to the
/// previous location, so every step uses the covariance of two consecutive
/// locations.
pub fn ldl_construct(spec: &CrossCovSpec, locations: &[f64]) -> Result<BandFactor> {
    check_locations(locations)?;
    let n = locations.len();
    let p = spec.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("no locations".into()));
    }
    let bw = if n > 1 { 2 * p - 1 } else { p - 1 };
    let mut l = BandMatrix::zeros(n * p, bw);
    let mut d = vec![0.0; n * p];
    let s1 = spec.block(locations[0], locations[0])?;
    for r in 0..p {
        let (coef, var) = conditional(&s1, r).ok_or(Error::NotPositiveDefinite { pivot: r })?;
        if !(var > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: r });
        }
        d[r] = 1.0 / var;
        l.set(r, r, 1.0);
        for (c, &b) in coef.iter().enumerate() {
            l.set(r, c, -b);
        }
    }
    for k in 1..n {
        let s = joint_cov(spec, &locations[k - 1..=k])?;
        for r in 0..p {
            let row = k * p + r;
            let (coef, var) = conditional(&s, p + r).ok_or(Error::NotPositiveDefinite { pivot: row })?;
            if !(var > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: row });
            }
            d[row] = 1.0 / var;
            l.set(row, row, 1.0);
            for (c, &b) in coef.iter().enumerate() {
                l.set(row, (k - 1) * p + c, -b);
            }
        }
    }
    BandFactor::from_parts(FactorForm::LtDl, l, d)
}
