//! Computations behind each subcommand, returning typed rows.

use markov_matern::decomposition::{components, rational_form, total_cov};
use markov_matern::gp::{build_joint, kl_divergence, posterior, sample_derivatives};
use markov_matern::kernels::{approx_spectral_density, matern, spectral_density, theory_bound_l2, MaternParams};
use markov_matern::oracle::{approx_cov_by_quadrature, cov_error_norms, dense_posterior, dense_true_posterior, gram};
use markov_matern::rational::{best_rational, partial_fractions, reversed_polynomials, DEFAULT_MAX_ITER, DEFAULT_TOL};
use markov_matern::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Evenly spaced points a, ..., b.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn rms(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len().max(1) as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffRow {
    pub beta: f64,
    pub m: usize,
    pub i: usize,
    pub a: f64,
    pub b: f64,
    /// Residue c_i and pole p_i; absent for i = 0.
    pub c: Option<f64>,
    pub p: Option<f64>,
    pub k: f64,
    pub sup_error: f64,
}

/// Numerator/denominator coefficients and partial fractions of the best approximation of x^β.
pub fn coeffs(beta: f64, m: usize) -> Result<Vec<CoeffRow>> {
    let r = best_rational(beta, m, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let (p, q) = reversed_polynomials(&r);
    let pf = partial_fractions(&p, &q)?;
    Ok((0..=m)
        .map(|i| CoeffRow {
            beta,
            m,
            i,
            a: r.a[i],
            b: r.b[i],
            c: i.checked_sub(1).map(|j| pf.c[j]),
            p: i.checked_sub(1).map(|j| pf.p[j]),
            k: pf.k,
            sup_error: r.sup_error,
        })
        .collect())
}

/// (w, f_α(w), f_{m,α}(w)) on the given frequencies. Integer α repeats f_α.
pub fn spectrum(params: &MaternParams, m: usize, ws: &[f64]) -> Result<Vec<[f64; 3]>> {
    let pf = if params.is_integer() { None } else { Some(rational_form(params, m)?) };
    Ok(ws
        .iter()
        .map(|&w| {
            let exact = spectral_density(w, params);
            [w, exact, pf.as_ref().map_or(exact, |pf| approx_spectral_density(w, params, pf))]
        })
        .collect())
}

/// (h, ϱ(h), ϱ_{m,α}(h)) and, with `oracle`, the numerical inverse Fourier transform
/// of f_{m,α} (which excludes any nugget).
pub fn cov_table(params: &MaternParams, m: usize, hs: &[f64], oracle: bool) -> Result<Vec<Vec<f64>>> {
    let comps = components(params, m)?;
    let pf = if oracle && !params.is_integer() { Some(rational_form(params, m)?) } else { None };
    hs.iter()
        .map(|&h| {
            let mut row = vec![h, matern(h, params), total_cov(&comps, h)];
            if oracle {
                row.push(match &pf {
                    Some(pf) => approx_cov_by_quadrature(params, pf, h)?,
                    None => matern(h, params),
                });
            }
            Ok(row)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovErrorRow {
    pub nu: f64,
    pub m: usize,
    pub l2_error: f64,
    pub sup_error: f64,
    pub theory_bound: f64,
}

/// Covariance errors of the order-m approximation on n even points of `interval`.
pub fn cov_error(
    nus: &[f64],
    ms: &[usize],
    n: usize,
    rho: f64,
    sigma: f64,
    interval: (f64, f64),
) -> Result<Vec<CovErrorRow>> {
    let t = linspace(interval.0, interval.1, n);
    let cells: Vec<(f64, usize)> = nus.iter().flat_map(|&nu| ms.iter().map(move |&m| (nu, m))).collect();
    cells
        .par_iter()
        .map(|&(nu, m)| {
            let params = MaternParams::from_range(nu, rho, sigma)?;
            let comps = components(&params, m)?;
            let (l2_error, sup_error) = cov_error_norms(&|h| total_cov(&comps, h), &params, &t);
            Ok(CovErrorRow { nu, m, l2_error, sup_error, theory_bound: theory_bound_l2(m, &params, interval) })
        })
        .collect()
}

/// Draws y ~ N(0, K + σ_e²I) for the exact Matérn kernel K.
pub fn simulate_observations(params: &MaternParams, t: &[f64], sigma_e: f64, seed: u64) -> Result<Vec<f64>> {
    let mut cov = gram(&|h| matern(h, params), t, t);
    for i in 0..t.len() {
        cov[(i, i)] += sigma_e * sigma_e;
    }
    let l = cov.cholesky().ok_or(Error::NotPositiveDefinite { pivot: 0 })?.l();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DVector::from_iterator(t.len(), (0..t.len()).map(|_| StandardNormal.sample(&mut rng)));
    Ok((l * z).iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictRow {
    pub nu: f64,
    pub sigma_e: f64,
    pub m: usize,
    pub mean_l2_error: f64,
    pub sd_l2_error: f64,
}

/// RMS differences between the band-pipeline posterior and the exact dense
/// posterior at n even observation points, for data simulated from the exact model.
#[allow(clippy::too_many_arguments)]
pub fn predict_errors(
    nus: &[f64],
    ms: &[usize],
    n: usize,
    rho: f64,
    sigma: f64,
    sigma_es: &[f64],
    interval: (f64, f64),
    seed: u64,
) -> Result<Vec<PredictRow>> {
    let t = linspace(interval.0, interval.1, n);
    let cells: Vec<(f64, f64)> = nus.iter().flat_map(|&nu| sigma_es.iter().map(move |&s| (nu, s))).collect();
    let rows: Result<Vec<Vec<PredictRow>>> = cells
        .par_iter()
        .map(|&(nu, sigma_e)| {
            let params = MaternParams::from_range(nu, rho, sigma)?;
            let y = simulate_observations(&params, &t, sigma_e, seed)?;
            let (truth, _) = dense_true_posterior(&params, &t, &y, sigma_e)?;
            let true_sd = truth.sd();
            ms.iter()
                .map(|&m| {
                    let model = build_joint(&params, m, &t)?;
                    let res = posterior(&model, &y, sigma_e)?;
                    Ok(PredictRow {
                        nu,
                        sigma_e,
                        m,
                        mean_l2_error: rms(&res.posterior_mean, truth.mean.as_slice()),
                        sd_l2_error: rms(&res.posterior_sd, true_sd.as_slice()),
                    })
                })
                .collect()
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

/// Observation points of the desk-scale forecasting scenario: 251 points on [0, 10].
pub const KL_OBSERVATIONS: usize = 251;
/// Mesh spacing of the forecasting scenario.
pub const KL_SPACING: f64 = 0.04;
/// Largest number of forecast points, reaching t = 15.
pub const KL_MAX_EXTRA: usize = 125;

/// Default forecast counts: 0..=10, 20, 30, 40, 50, 75, 100, 125.
pub fn kl_default_extras() -> Vec<usize> {
    (0..=10).chain([20, 30, 40, 50, 75, 100, 125]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KlMode {
    /// Distribution of the field at the points.
    Prior,
    /// Posterior given noisy observations at the first 251 points.
    Posterior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KlRow {
    pub rho: f64,
    pub n_pred_extra: usize,
    pub m: usize,
    pub kl: f64,
}

/// KL(true ‖ approximate) of the joint distribution at the observation points
/// plus the first `extra` forecast points of the mesh.
#[allow(clippy::too_many_arguments)]
pub fn kl_scenario(
    nu: f64,
    rhos: &[f64],
    ms: &[usize],
    extras: &[usize],
    mode: KlMode,
    sigma: f64,
    sigma_e: f64,
    seed: u64,
) -> Result<Vec<KlRow>> {
    let max_extra = extras.iter().copied().max().unwrap_or(0);
    let mesh: Vec<f64> = (0..KL_OBSERVATIONS + max_extra).map(|i| i as f64 * KL_SPACING).collect();
    let obs = &mesh[..KL_OBSERVATIONS];
    let cells: Vec<(f64, usize)> = rhos.iter().flat_map(|&r| ms.iter().map(move |&m| (r, m))).collect();
    let rows: Result<Vec<Vec<KlRow>>> = cells
        .par_iter()
        .map(|&(rho, m)| {
            let params = MaternParams::from_range(nu, rho, sigma)?;
            let comps = components(&params, m)?;
            let exact = |h: f64| matern(h, &params);
            let approx = |h: f64| total_cov(&comps, h);
            let (truth, model) = match mode {
                KlMode::Prior => (
                    (DVector::zeros(mesh.len()), gram(&exact, &mesh, &mesh)),
                    (DVector::zeros(mesh.len()), gram(&approx, &mesh, &mesh)),
                ),
                KlMode::Posterior => {
                    let y = simulate_observations(&params, obs, sigma_e, seed)?;
                    let (a, _) = dense_posterior(&exact, obs, &y, sigma_e, &mesh)?;
                    let (b, _) = dense_posterior(&approx, obs, &y, sigma_e, &mesh)?;
                    ((a.mean, a.covariance), (b.mean, b.covariance))
                }
            };
            extras
                .iter()
                .map(|&extra| {
                    let d = KL_OBSERVATIONS + extra;
                    let block = |g: &(DVector<f64>, DMatrix<f64>)| (g.0.rows(0, d).into_owned(), g.1.view((0, 0), (d, d)).into_owned());
                    let (ma, ca) = block(&truth);
                    let (mb, cb) = block(&model);
                    Ok(KlRow { rho, n_pred_extra: extra, m, kl: kl_divergence(&ma, &ca, &mb, &cb)? })
                })
                .collect()
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

/// One draw at `t`: `out[0]` holds u and `out[d]` the d-th derivative.
pub fn sample_path(params: &MaternParams, m: usize, t: &[f64], seed: u64, derivatives: usize) -> Result<Vec<Vec<f64>>> {
    let model = build_joint(params, m, t)?;
    sample_derivatives(&model, seed, derivatives)
}
