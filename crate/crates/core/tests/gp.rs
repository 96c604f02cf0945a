use markov_matern::decomposition::{components, total_cov};
use markov_matern::gp::{
    build_joint, kl_divergence, loglik, posterior, posterior_partial, predict, sample, sample_derivatives, JointModel,
};
use markov_matern::kernels::{matern, MaternParams};
use markov_matern::oracle::{dense_log_density, dense_posterior, dense_true_posterior, gram};
use markov_matern::Error;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn params(nu: f64) -> MaternParams {
    MaternParams::from_range(nu, 2.0, 1.0).unwrap()
}

fn grid(n: usize, a: f64, b: f64) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn jittered(n: usize, h: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|j| h * (j as f64 + 0.5 + rng.random_range(-0.3..0.3))).collect()
}

fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// y = u + σ_e ε with u drawn from the model itself.
fn synthetic(model: &JointModel, sigma_e: f64, seed: u64) -> Vec<f64> {
    let u = sample(model, seed);
    u.iter().zip(noise(u.len(), seed + 1)).map(|(u, e)| u + sigma_e * e).collect()
}

fn approx_kernel(p: &MaternParams, m: usize) -> impl Fn(f64) -> f64 {
    let comps = components(p, m).unwrap();
    move |h| total_cov(&comps, h)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Dense A Q⁻¹ Aᵀ.
fn dense_prior_cov(model: &JointModel) -> DMatrix<f64> {
    let q = model.prior_precision().to_dense();
    let cov = q.cholesky().unwrap().inverse();
    let n = model.n();
    let nc = model.components.len();
    DMatrix::from_fn(n, n, |i, j| {
        let mut s = 0.0;
        for a in 0..nc {
            for b in 0..nc {
                s += cov[(model.value_index(i, a), model.value_index(j, b))];
            }
        }
        s
    })
}

#[test]
fn state_dimension() {
    let model = build_joint(&params(1.0), 3, &grid(100, 0.0, 10.0)).unwrap();
    assert_eq!(model.state_dim(), 700);
    assert_eq!(model.block_size(), 7);
    let exact = build_joint(&params(0.5), 3, &grid(100, 0.0, 10.0)).unwrap();
    assert_eq!(exact.state_dim(), 100);
    assert_eq!(exact.components.len(), 1);
    for (nu, m) in [(0.3, 2), (0.8, 4), (1.4, 3), (2.3, 5)] {
        let p = params(nu);
        let model = build_joint(&p, m, &grid(20, 0.0, 10.0)).unwrap();
        let ceil = p.alpha.ceil() as usize;
        let floor = p.alpha.floor() as usize;
        assert_eq!(model.state_dim(), 20 * (m * ceil + floor.max(1)));
        if ceil <= 2 {
            assert!(model.bandwidth() <= ceil * (m + 1), "nu {nu}");
        }
    }
}

#[test]
fn rejects_unsorted_and_duplicate_locations() {
    let p = params(1.0);
    assert!(matches!(build_joint(&p, 2, &[0.0, 1.0, 1.0]), Err(Error::DuplicateLocations(1, 2))));
    assert!(matches!(build_joint(&p, 2, &[0.0, 2.0, 1.0]), Err(Error::InvalidArgument(_))));
    assert!(build_joint(&p, 2, &[]).is_err());
}

#[test]
fn prior_covariance_matches_closed_form() {
    for nu in [0.3, 0.8, 1.4, 2.3] {
        let p = params(nu);
        let t = jittered(10, 1.0, 5);
        let model = build_joint(&p, 3, &t).unwrap();
        let got = dense_prior_cov(&model);
        let want = gram(&approx_kernel(&p, 3), &t, &t);
        let err = (&got - &want).amax();
        assert!(err < 1e-6, "nu {nu}: {err:.3e}");
    }
}

#[test]
fn posterior_matches_dense_same_model() {
    let p = params(1.0);
    let t = grid(300, 0.0, 30.0);
    let model = build_joint(&p, 4, &t).unwrap();
    let kernel = approx_kernel(&p, 4);
    for sigma_e in [0.1, 0.1f64.sqrt()] {
        let y = synthetic(&model, sigma_e, 3);
        let res = posterior(&model, &y, sigma_e).unwrap();
        let (dense, ll) = dense_posterior(&kernel, &t, &y, sigma_e, &t).unwrap();
        assert!(max_abs_diff(&res.posterior_mean, dense.mean.as_slice()) < 1e-6);
        assert!(max_abs_diff(&res.posterior_sd, dense.sd().as_slice()) < 1e-6);
        assert!(((res.loglik - ll) / ll).abs() < 1e-6, "{} vs {ll}", res.loglik);
        assert_eq!(res.diagnostics.state_dim, model.state_dim());
    }
}

#[test]
fn loglik_matches_dense_density() {
    for (nu, m) in [(0.4, 3), (1.4, 2), (2.2, 3)] {
        let p = params(nu);
        let t = jittered(200, 0.1, 11);
        let model = build_joint(&p, m, &t).unwrap();
        let y = noise(200, 4);
        let ll = loglik(&model, &y, 0.2).unwrap();
        let mut cov = gram(&approx_kernel(&p, m), &t, &t);
        for i in 0..200 {
            cov[(i, i)] += 0.04;
        }
        let want = dense_log_density(&DVector::from_vec(y), cov).unwrap();
        assert!(((ll - want) / want).abs() < 1e-6, "nu {nu}: {ll} vs {want}");
    }
}

#[test]
fn single_observation_loglik() {
    let p = params(1.3);
    let model = build_joint(&p, 3, &[2.0]).unwrap();
    let v = approx_kernel(&p, 3)(0.0);
    let (y, s) = (0.7, 0.3);
    let var = v + s * s;
    let want = -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + y * y / var);
    let got = loglik(&model, &[y], s).unwrap();
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
}

#[test]
fn independent_blocks_add() {
    let p = params(1.0);
    let block = grid(40, 0.0, 5.0);
    let far: Vec<f64> = block.iter().map(|t| t + 1e4).collect();
    let both: Vec<f64> = block.iter().chain(&far).copied().collect();
    let y = noise(40, 8);
    let yy: Vec<f64> = y.iter().chain(&y).copied().collect();
    let one = loglik(&build_joint(&p, 4, &block).unwrap(), &y, 0.1).unwrap();
    let two = loglik(&build_joint(&p, 4, &both).unwrap(), &yy, 0.1).unwrap();
    assert!((two - 2.0 * one).abs() < 1e-9 * one.abs(), "{two} vs {}", 2.0 * one);
}

#[test]
fn no_information_limit() {
    let p = params(1.4);
    let model = build_joint(&p, 3, &grid(50, 0.0, 10.0)).unwrap();
    let y = noise(50, 1);
    let res = posterior(&model, &y, 1e8).unwrap();
    let prior_sd = approx_kernel(&p, 3)(0.0).sqrt();
    assert!(res.posterior_mean.iter().all(|m| m.abs() < 1e-6));
    assert!(res.posterior_sd.iter().all(|s| (s - prior_sd).abs() < 1e-6));
}

#[test]
fn posterior_sd_below_prior_sd() {
    let p = params(0.7);
    let model = build_joint(&p, 5, &jittered(80, 0.2, 2)).unwrap();
    let y = synthetic(&model, 0.3, 9);
    let res = posterior(&model, &y, 0.3).unwrap();
    let prior_sd = approx_kernel(&p, 5)(0.0).sqrt();
    assert!(res.posterior_sd.iter().all(|&s| s >= 0.0 && s <= prior_sd + 1e-9));
}

#[test]
fn exact_at_integer_alpha() {
    for nu in [0.5, 1.5, 2.5] {
        let p = params(nu);
        let t = grid(500, 0.0, 50.0);
        let model = build_joint(&p, 3, &t).unwrap();
        let y = synthetic(&model, 0.1, 21);
        let res = posterior(&model, &y, 0.1).unwrap();
        let (dense, ll) = dense_true_posterior(&p, &t, &y, 0.1).unwrap();
        let err = max_abs_diff(&res.posterior_mean, dense.mean.as_slice());
        assert!(err < 1e-8, "nu {nu}: {err:.3e}");
        assert!(((res.loglik - ll) / ll).abs() < 1e-8);
    }
}

#[test]
fn prediction_matches_dense_kriging() {
    let p = params(1.2);
    let obs = jittered(60, 0.25, 6);
    let y = noise(60, 12);
    let at = vec![-1.0, 3.33, obs[10], 7.9, 16.0, 20.0];
    let res = predict(&p, 4, &obs, &y, 0.2, &at).unwrap();
    let (dense, ll) = dense_posterior(&approx_kernel(&p, 4), &obs, &y, 0.2, &at).unwrap();
    assert!(max_abs_diff(&res.posterior_mean, dense.mean.as_slice()) < 1e-7);
    assert!(max_abs_diff(&res.posterior_sd, dense.sd().as_slice()) < 1e-7);
    assert!(((res.loglik - ll) / ll).abs() < 1e-8);
}

#[test]
fn unobserved_locations_carry_no_data() {
    let p = params(1.0);
    let t = grid(30, 0.0, 6.0);
    let model = build_joint(&p, 3, &t).unwrap();
    let observed: Vec<usize> = (0..30).step_by(3).collect();
    let y = noise(observed.len(), 5);
    let res = posterior_partial(&model, &observed, &y, 0.1).unwrap();
    let obs_t: Vec<f64> = observed.iter().map(|&j| t[j]).collect();
    let (dense, _) = dense_posterior(&approx_kernel(&p, 3), &obs_t, &y, 0.1, &t).unwrap();
    assert!(max_abs_diff(&res.posterior_mean, dense.mean.as_slice()) < 1e-7);
}

#[test]
fn sampling_is_deterministic() {
    let model = build_joint(&params(1.0), 4, &grid(50, 0.0, 10.0)).unwrap();
    assert_eq!(sample(&model, 42), sample(&model, 42));
    assert_ne!(sample(&model, 42), sample(&model, 43));
}

#[test]
fn ou_lag_correlation() {
    let p = params(0.5);
    let dt = 0.3;
    let model = build_joint(&p, 1, &[0.0, dt]).unwrap();
    let draws = 50_000;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for s in 0..draws {
        let u = sample(&model, s);
        sxy += u[0] * u[1];
        sxx += u[0] * u[0];
    }
    let r = sxy / sxx;
    let rho = (-p.kappa * dt).exp();
    let se = (1.0 - rho * rho) / (draws as f64).sqrt();
    assert!((r - rho).abs() < 3.0 * se, "{r} vs {rho}");
}

#[test]
fn sample_covariance_matches_kernel() {
    let p = params(1.4);
    let t = [0.0, 0.2, 1.0];
    let model = build_joint(&p, 3, &t).unwrap();
    let k = approx_kernel(&p, 3);
    let draws = 40_000;
    let mut acc = [0.0; 3];
    for s in 0..draws {
        let u = sample(&model, s);
        acc[0] += u[0] * u[0];
        acc[1] += u[0] * u[1];
        acc[2] += u[0] * u[2];
    }
    let v0 = k(0.0);
    for (i, h) in [0.0, 0.2, 1.0].into_iter().enumerate() {
        let c = k(h);
        let se = ((v0 * v0 + c * c) / draws as f64).sqrt();
        let est = acc[i] / draws as f64;
        assert!((est - c).abs() < 3.0 * se, "h {h}: {est} vs {c}");
    }
}

#[test]
fn derivative_samples() {
    let p = params(2.4);
    let model = build_joint(&p, 2, &[0.0, 0.5]).unwrap();
    let comps = components(&p, 2).unwrap();
    let var_d1: f64 = -comps.iter().map(|c| c.deriv(2, 0.0).unwrap()).sum::<f64>();
    let draws = 40_000;
    let mut acc = 0.0;
    for s in 0..draws {
        let d = sample_derivatives(&model, s, 1).unwrap();
        acc += d[1][0] * d[1][0];
    }
    let est = acc / draws as f64;
    let se = var_d1 * (2.0 / draws as f64).sqrt();
    assert!((est - var_d1).abs() < 3.0 * se, "{est} vs {var_d1}");
    // an OU-type component has no derivative state
    let rough = build_joint(&params(1.0), 2, &[0.0, 0.5]).unwrap();
    assert!(sample_derivatives(&rough, 0, 1).is_err());
}

#[test]
fn kl_of_exact_prior_is_zero() {
    let p = params(1.5);
    let t = grid(30, 0.0, 5.0);
    let model = build_joint(&p, 2, &t).unwrap();
    let a = dense_prior_cov(&model);
    let b = gram(&|h| matern(h, &p), &t, &t);
    let z = DVector::zeros(30);
    assert!(kl_divergence(&z, &a, &z, &b).unwrap() < 1e-10);
}
