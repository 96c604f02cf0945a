use std::f64::consts::PI;

use super::model::{build_joint, JointModel};
use crate::banded::{band_ldl, band_solve, selected_inverse, BandFactor};
use crate::error::{Error, Result};
use crate::kernels::MaternParams;

/// Prediction and observation points closer than this fraction of the span are merged.
pub const MERGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Flops spent factorizing the posterior precision.
    pub flops: u64,
    /// Half-bandwidth of the posterior precision.
    pub bandwidth: usize,
    /// Total state dimension N.
    pub state_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub posterior_mean: Vec<f64>,
    pub posterior_sd: Vec<f64>,
    /// Log marginal likelihood of the observations.
    pub loglik: f64,
    pub diagnostics: Diagnostics,
}

struct Fit {
    factor: BandFactor,
    mean_state: Vec<f64>,
    mean: Vec<f64>,
}

fn check_noise(sigma_e: f64) -> Result<()> {
    if !(sigma_e > 0.0 && sigma_e.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma_e must be positive, got {sigma_e}")));
    }
    Ok(())
}

fn fit(model: &JointModel, observed: &[usize], y: &[f64], sigma_e: f64) -> Result<Fit> {
    check_noise(sigma_e)?;
    if observed.len() != y.len() {
        return Err(Error::Dimension { expected: observed.len(), got: y.len() });
    }
    if let Some(&j) = observed.iter().find(|&&j| j >= model.n()) {
        return Err(Error::InvalidArgument(format!("observation index {j} outside {} locations", model.n())));
    }
    let nc = model.components.len();
    let w = 1.0 / (sigma_e * sigma_e);
    let mut q = model.prior_precision();
    let mut rhs = vec![0.0; model.state_dim()];
    // Q + AᵀA/σ²: every observation couples all value coordinates at its location
    for (&j, &yj) in observed.iter().zip(y) {
        for c in 0..nc {
            let vc = model.value_index(j, c);
            rhs[vc] += w * yj;
            for c2 in 0..=c {
                q.add(vc, model.value_index(j, c2), w);
            }
        }
    }
    let factor = band_ldl(&q)?;
    let mean_state = band_solve(&factor, &rhs)?;
    let mean = model.observe(&mean_state);
    Ok(Fit { factor, mean_state, mean })
}

fn log_likelihood(model: &JointModel, fit: &Fit, observed: &[usize], y: &[f64], sigma_e: f64) -> f64 {
    let n = observed.len() as f64;
    let mut quad = 0.0;
    for (c, comp) in model.components.iter().enumerate() {
        let local: Vec<f64> = (0..comp.factor.dim()).map(|k| fit.mean_state[model.global_index(c, k)]).collect();
        quad += comp.factor.quad_form(&local);
    }
    let resid: f64 = observed.iter().zip(y).map(|(&j, &yj)| (yj - fit.mean[j]).powi(2)).sum();
    0.5 * (model.log_det_precision() - 2.0 * n * sigma_e.ln() - fit.factor.log_det() - quad
        - resid / (sigma_e * sigma_e)
        - n * (2.0 * PI).ln())
}

/// Posterior of u at every model location given y_k = u(t_{observed[k]}) + N(0, σ_e²).
///
/// Locations not listed in `observed` carry no data and are predicted.
pub fn posterior_partial(model: &JointModel, observed: &[usize], y: &[f64], sigma_e: f64) -> Result<RegressionResult> {
    let fit = fit(model, observed, y, sigma_e)?;
    let loglik = log_likelihood(model, &fit, observed, y, sigma_e);
    let sinv = selected_inverse(&fit.factor);
    let nc = model.components.len();
    let posterior_sd = (0..model.n())
        .map(|j| {
            let mut v = 0.0;
            for c in 0..nc {
                for c2 in 0..nc {
                    v += sinv.get(model.value_index(j, c), model.value_index(j, c2));
                }
            }
            v.max(0.0).sqrt()
        })
        .collect();
    Ok(RegressionResult {
        posterior_mean: fit.mean,
        posterior_sd,
        loglik,
        diagnostics: Diagnostics {
            flops: fit.factor.flops(),
            bandwidth: fit.factor.bandwidth(),
            state_dim: model.state_dim(),
        },
    })
}

/// Posterior with one observation at each model location.
pub fn posterior(model: &JointModel, y: &[f64], sigma_e: f64) -> Result<RegressionResult> {
    if y.len() != model.n() {
        return Err(Error::Dimension { expected: model.n(), got: y.len() });
    }
    let observed: Vec<usize> = (0..model.n()).collect();
    posterior_partial(model, &observed, y, sigma_e)
}

/// Log marginal likelihood of y observed at every model location.
pub fn loglik(model: &JointModel, y: &[f64], sigma_e: f64) -> Result<f64> {
    if y.len() != model.n() {
        return Err(Error::Dimension { expected: model.n(), got: y.len() });
    }
    let observed: Vec<usize> = (0..model.n()).collect();
    let fit = fit(model, &observed, y, sigma_e)?;
    Ok(log_likelihood(model, &fit, &observed, y, sigma_e))
}

/// Regression at arbitrary `predict_at` points from observations at `obs`.
///
/// The model is built on the sorted union of both point sets, with points
/// closer than [`MERGE_TOL`] times the span merged, so predictions come out of
/// the same band solve as the fit. Mean and sd are returned in the order of
/// `predict_at`; the log-likelihood is that of y.
pub fn predict(
    params: &MaternParams,
    m: usize,
    obs: &[f64],
    y: &[f64],
    sigma_e: f64,
    predict_at: &[f64],
) -> Result<RegressionResult> {
    if obs.len() != y.len() {
        return Err(Error::Dimension { expected: obs.len(), got: y.len() });
    }
    if obs.iter().chain(predict_at).any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("locations must be finite".into()));
    }
    // (location, source): source k < obs.len() is observation k, otherwise prediction k − obs.len()
    let mut points: Vec<(f64, usize)> = obs.iter().chain(predict_at).copied().zip(0..).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (lo, hi) = (points.first().map_or(0.0, |p| p.0), points.last().map_or(0.0, |p| p.0));
    let tol = MERGE_TOL * (hi - lo).max(f64::MIN_POSITIVE);
    let mut grid: Vec<f64> = Vec::new();
    let mut slot = vec![0; points.len()];
    for &(t, src) in &points {
        match grid.last() {
            Some(&last) if t - last <= tol => {}
            _ => grid.push(t),
        }
        slot[src] = grid.len() - 1;
    }
    let model = build_joint(params, m, &grid)?;
    let observed = &slot[..obs.len()];
    let full = posterior_partial(&model, observed, y, sigma_e)?;
    let pick = |v: &[f64]| slot[obs.len()..].iter().map(|&j| v[j]).collect::<Vec<_>>();
    Ok(RegressionResult {
        posterior_mean: pick(&full.posterior_mean),
        posterior_sd: pick(&full.posterior_sd),
        loglik: full.loglik,
        diagnostics: full.diagnostics,
    })
}
