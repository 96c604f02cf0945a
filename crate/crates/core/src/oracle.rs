//! Slow reference computations: dense Gaussian-process regression with the
//! exact Matérn kernel, numerical inverse Fourier transforms of spectral
//! densities, and covariance error norms on location grids.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernels::{approx_spectral_density, matern, MaternParams};
use crate::rational::PartialFractionForm;
use crate::quadrature::integrate;

/// A multivariate normal distribution in moment form.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGaussian {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl DenseGaussian {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn sd(&self) -> DVector<f64> {
        self.covariance.diagonal().map(|v| v.max(0.0).sqrt())
    }
}

/// Dense covariance matrix K[i, j] = k(s_i − t_j).
pub fn gram<K: Fn(f64) -> f64>(kernel: &K, s: &[f64], t: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(s.len(), t.len(), |i, j| kernel(s[i] - t[j]))
}

/// log N(y; 0, cov) through a dense Cholesky factorization.
pub fn dense_log_density(y: &DVector<f64>, cov: DMatrix<f64>) -> Result<f64> {
    let n = y.len();
    let chol = cov.cholesky().ok_or(Error::NotPositiveDefinite { pivot: 0 })?;
    let l = chol.l();
    let z = l.solve_lower_triangular(y).ok_or(Error::NotPositiveDefinite { pivot: 0 })?;
    let logdet: f64 = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
    Ok(-0.5 * (z.norm_squared() + logdet + n as f64 * (2.0 * PI).ln()))
}

/// Posterior of u at `predict` given y_i = u(t_i) + N(0, σ_e²) at `obs`, with the
/// log marginal likelihood of y. Dense O(n³).
pub fn dense_posterior<K: Fn(f64) -> f64>(
    kernel: &K,
    obs: &[f64],
    y: &[f64],
    sigma_e: f64,
    predict: &[f64],
) -> Result<(DenseGaussian, f64)> {
    if obs.len() != y.len() {
        return Err(Error::Dimension { expected: obs.len(), got: y.len() });
    }
    let yv = DVector::from_column_slice(y);
    let mut koo = gram(kernel, obs, obs);
    for i in 0..obs.len() {
        koo[(i, i)] += sigma_e * sigma_e;
    }
    let loglik = dense_log_density(&yv, koo.clone())?;
    let chol = koo.cholesky().ok_or(Error::NotPositiveDefinite { pivot: 0 })?;
    let kpo = gram(kernel, predict, obs);
    let alpha = chol.solve(&yv);
    let mean = &kpo * alpha;
    let w = chol.solve(&kpo.transpose());
    let covariance = gram(kernel, predict, predict) - &kpo * w;
    let covariance = 0.5 * (&covariance + covariance.transpose());
    Ok((DenseGaussian { mean, covariance }, loglik))
}

/// Dense GP regression with the exact Matérn kernel at the observation locations.
pub fn dense_true_posterior(params: &MaternParams, locations: &[f64], y: &[f64], sigma_e: f64) -> Result<(DenseGaussian, f64)> {
    let kernel = |h: f64| matern(h, params);
    dense_posterior(&kernel, locations, y, sigma_e, locations)
}

/// Settings for [`quadrature_inverse_fourier`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierOptions {
    /// Truncation frequency; beyond it an asymptotic tail is added.
    pub w_max: f64,
    /// Absolute accuracy target for the whole integral.
    pub abs_tol: f64,
}

/// Truncation frequency 10³κ√(1 − min p_i) for a spectral density with poles p_i.
pub fn default_w_max(kappa: f64, poles: &[f64]) -> f64 {
    let pmin = poles.iter().cloned().fold(0.0, f64::min);
    1e3 * kappa * (1.0 - pmin).sqrt()
}

/// (1/π)∫₀^∞ f(w) cos(wh) dw for an even, integrable, eventually power-law f.
///
/// Panels are geometric near the origin and at most half an oscillation
/// period wide elsewhere. The tail beyond w_max is added analytically: a
/// power-law integral at h = 0 and two integration-by-parts terms otherwise.
pub fn quadrature_inverse_fourier<F: Fn(f64) -> f64>(f: &F, h: f64, opts: FourierOptions) -> Result<f64> {
    let h = h.abs();
    let mut w_max = opts.w_max;
    if h > 0.0 {
        w_max = w_max.max(200.0 / h);
    }
    let integrand = |w: f64| f(w) * (w * h).cos();

    let mut breaks = vec![0.0];
    let mut x = w_max * 1e-6;
    while x < w_max {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(w_max);
    let max_panel = if h > 0.0 { PI / h } else { f64::INFINITY };
    let mut panels = Vec::new();
    for win in breaks.windows(2) {
        let (a, b) = (win[0], win[1]);
        let pieces = ((b - a) / max_panel).ceil().max(1.0) as usize;
        let step = (b - a) / pieces as f64;
        for k in 0..pieces {
            panels.push((a + k as f64 * step, if k + 1 == pieces { b } else { a + (k + 1) as f64 * step }));
        }
    }
    let mut total = 0.0;
    let mut comp = 0.0;
    for &(a, b) in &panels {
        let tol = (opts.abs_tol * PI * (b - a) / w_max).max(f64::MIN_POSITIVE);
        let v = integrate(&integrand, a, b, tol)?;
        // Kahan summation: there can be ~10⁶ panels
        let y = v - comp;
        let t = total + y;
        comp = (t - total) - y;
        total = t;
    }

    let g = f(w_max);
    let g2 = f(1.1 * w_max);
    let s = -(g2 / g).ln() / 1.1f64.ln();
    let tail = if g == 0.0 {
        0.0
    } else if h == 0.0 {
        if !(s > 1.0) {
            return Err(Error::Quadrature(f64::INFINITY));
        }
        g * w_max / (s - 1.0)
    } else {
        let dg = -s * g / w_max;
        -g * (w_max * h).sin() / h - dg * (w_max * h).cos() / (h * h)
    };
    Ok((total + tail) / PI)
}

/// Continuous part of ϱ_{m,α}(h) by numerical inversion of f_{m,α}.
///
/// For α < 1 the density tends to a positive constant whose transform is a
/// point mass at lag 0 (the nugget). That constant is removed before
/// integrating, so the result excludes the nugget at h = 0.
pub fn approx_cov_by_quadrature(params: &MaternParams, pf: &PartialFractionForm, h: f64) -> Result<f64> {
    let floor_level = if params.floor() == 0 {
        params.spectral_constant() * params.sigma2 * params.kappa.powf(-2.0 * params.alpha) * pf.k
    } else {
        0.0
    };
    let f = |w: f64| approx_spectral_density(w, params, pf) - floor_level;
    let opts = FourierOptions {
        w_max: default_w_max(params.kappa, &pf.p),
        abs_tol: 1e-8 * f(0.0) * params.kappa,
    };
    quadrature_inverse_fourier(&f, h, opts)
}

/// Discrete L2 and sup norms of the covariance error over all location pairs.
///
/// L2 is sqrt((1/n²) Σ_{i,j} e(t_i − t_j)²). On evenly spaced grids each lag
/// is evaluated once and weighted by its multiplicity.
pub fn cov_error_norms<A: Fn(f64) -> f64>(approx: &A, params: &MaternParams, locations: &[f64]) -> (f64, f64) {
    let n = locations.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let err = |h: f64| approx(h) - matern(h, params);
    let even = n > 2 && {
        let d = locations[1] - locations[0];
        locations.windows(2).all(|w| ((w[1] - w[0]) - d).abs() <= 1e-9 * d.abs())
    };
    let mut sum = 0.0;
    let mut sup = 0.0f64;
    if even || n <= 2 {
        let d = if n > 1 { locations[1] - locations[0] } else { 0.0 };
        for k in 0..n {
            let e = err(k as f64 * d);
            let weight = if k == 0 { n as f64 } else { 2.0 * (n - k) as f64 };
            sum += weight * e * e;
            sup = sup.max(e.abs());
        }
    } else {
        for i in 0..n {
            for j in 0..n {
                let e = err(locations[i] - locations[j]);
                sum += e * e;
                sup = sup.max(e.abs());
            }
        }
    }
    ((sum / (n * n) as f64).sqrt(), sup)
}

/// K_ν(x) from its integral representation ∫₀^∞ e^{−x cosh t} cosh(νt) dt,
/// as an independent check on the series and continued-fraction evaluation.
pub fn bessel_k_quadrature(nu: f64, x: f64) -> Result<f64> {
    let f = |t: f64| (-x * t.cosh() + nu * t).exp() * 0.5 * (1.0 + (-2.0 * nu * t).exp());
    // the integrand is below e^{−x e^T/2 + νT}; stop where that is negligible
    let mut upper = 1.0f64;
    while -x * upper.cosh() + nu * upper > -60.0 {
        upper += 1.0;
    }
    integrate(&f, 0.0, upper, 1e-15)
}
