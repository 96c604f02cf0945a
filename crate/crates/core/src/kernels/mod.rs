//! Matérn covariance functions, closed-form half-integer terms and their
//! derivatives, and the exact and rational-approximate spectral densities.

mod bessel;
mod halfint;

pub use bessel::{bessel_k, bessel_k_scaled};
pub use halfint::{half_int_matern_deriv, half_int_matern_deriv_marked, DerivValue, HalfIntMaternTerm};

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::rational::{stahl_bound, PartialFractionForm};

/// Smoothness values closer than this to an integer are treated as integers.
pub const INTEGER_ALPHA_TOL: f64 = 1e-6;

/// Matérn parameters in the (α, κ, σ²) parametrization, α = ν + ½.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaternParams {
    pub alpha: f64,
    pub kappa: f64,
    pub sigma2: f64,
}

impl MaternParams {
    pub fn new(alpha: f64, kappa: f64, sigma2: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidArgument(format!("kappa must be positive, got {kappa}")));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma2 must be positive, got {sigma2}")));
        }
        Ok(Self { alpha, kappa, sigma2 })
    }

    /// From smoothness ν, practical range ρ and marginal standard deviation σ.
    pub fn from_range(nu: f64, rho: f64, sigma: f64) -> Result<Self> {
        if !(nu > 0.0) || !(rho > 0.0) {
            return Err(Error::InvalidArgument(format!("need nu > 0 and rho > 0, got {nu}, {rho}")));
        }
        Self::new(nu + 0.5, (8.0 * nu).sqrt() / rho, sigma * sigma)
    }

    pub fn nu(&self) -> f64 {
        self.alpha - 0.5
    }

    pub fn rho(&self) -> f64 {
        (8.0 * self.nu()).sqrt() / self.kappa
    }

    pub fn is_integer(&self) -> bool {
        (self.alpha - self.alpha.round()).abs() < INTEGER_ALPHA_TOL && self.alpha.round() >= 1.0
    }

    /// ⌊α⌋, with α within [`INTEGER_ALPHA_TOL`] of an integer snapped to it.
    pub fn floor(&self) -> usize {
        if self.is_integer() {
            self.alpha.round() as usize
        } else {
            self.alpha.floor() as usize
        }
    }

    pub fn ceil(&self) -> usize {
        if self.is_integer() {
            self.alpha.round() as usize
        } else {
            self.alpha.ceil() as usize
        }
    }

    /// Fractional part {α}; zero for integer α.
    pub fn frac(&self) -> f64 {
        if self.is_integer() {
            0.0
        } else {
            self.alpha - self.alpha.floor()
        }
    }

    /// Spectral normalizing constant A, so that (1/2π)∫f = σ².
    pub fn spectral_constant(&self) -> f64 {
        let nu = self.nu();
        2.0 * PI.sqrt() * (2.0 * nu * self.kappa.ln() + ln_gamma(nu + 0.5) - ln_gamma(nu)).exp()
    }
}

/// c_a = Γ(a)/Γ(a − ½), evaluated through log-gamma.
pub fn gamma_ratio(a: f64) -> f64 {
    (ln_gamma(a) - ln_gamma(a - 0.5)).exp()
}

/// Matérn covariance ϱ(h; ν, κ, σ²).
pub fn matern(h: f64, params: &MaternParams) -> f64 {
    let h = h.abs();
    if h == 0.0 {
        return params.sigma2;
    }
    let nu = params.nu();
    let x = params.kappa * h;
    // x^ν K_ν(x) → Γ(ν)2^{ν−1} as x → 0; below this the limit is exact in f64
    if x < 1e-300 {
        return params.sigma2;
    }
    match bessel_k_scaled(nu, x) {
        Ok(ks) => {
            let log = (1.0 - nu) * 2f64.ln() - ln_gamma(nu) + nu * x.ln() + ks.ln() - x;
            params.sigma2 * log.exp()
        }
        Err(_) => {
            // K_ν overflow only happens for tiny x, where the limit applies
            if x < 1.0 {
                params.sigma2
            } else {
                0.0
            }
        }
    }
}

/// Exact Matérn spectral density f_α(w) = Aσ²(κ² + w²)^{−α}.
pub fn spectral_density(w: f64, params: &MaternParams) -> f64 {
    let a = params.spectral_constant();
    let k2 = params.kappa * params.kappa;
    a * params.sigma2 * (-(params.alpha) * (k2 + w * w).ln()).exp()
}

/// The m + 1 summands f_{m,0,α}, f_{m,1,α}, ... of the approximate spectral density.
pub fn approx_spectral_components(w: f64, params: &MaternParams, pf: &PartialFractionForm) -> Vec<f64> {
    let scale = params.spectral_constant() * params.sigma2 * (-2.0 * params.alpha * params.kappa.ln()).exp();
    let x = 1.0 + (w / params.kappa).powi(2);
    let base = x.powi(-(params.floor() as i32));
    let mut out = Vec::with_capacity(pf.c.len() + 1);
    out.push(scale * pf.k * base);
    for (c, p) in pf.c.iter().zip(&pf.p) {
        out.push(scale * c * base / (x - p));
    }
    out
}

/// Approximate spectral density f_{m,α}(w).
pub fn approx_spectral_density(w: f64, params: &MaternParams, pf: &PartialFractionForm) -> f64 {
    approx_spectral_components(w, params, pf).iter().sum()
}

/// M_{n,κ} = κπΓ(2n−1)/(4^{n−1}Γ(n)²); infinite for n = 0.
pub fn m_constant(n: usize, kappa: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    let n = n as f64;
    kappa * PI * gamma(2.0 * n - 1.0) / (4f64.powf(n - 1.0) * gamma(n).powi(2))
}

/// Upper bound on the L2(I×I) covariance error of the order-m approximation.
pub fn theory_bound_l2(m: usize, params: &MaternParams, interval: (f64, f64)) -> f64 {
    if params.is_integer() {
        return 0.0;
    }
    let (a, b) = interval;
    let amp = params.spectral_constant() * params.sigma2 * params.kappa.powf(-2.0 * params.alpha);
    let mconst = m_constant(params.floor(), params.kappa).min(1.0);
    2.0 * PI.sqrt() * (b - a) * amp * mconst * stahl_bound(params.frac(), m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matern_special_cases() {
        let p = MaternParams::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(matern(0.0, &p), 1.0);
        assert_relative_eq!(matern(1.0, &p), (-1.0f64).exp(), max_relative = 1e-14);
        let p = MaternParams::new(2.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(matern(2.0, &p), 3.0 * (-2.0f64).exp(), max_relative = 1e-14);
        let p = MaternParams::new(1.3, 0.7, 2.5).unwrap();
        assert_eq!(matern(0.0, &p), 2.5);
        assert_relative_eq!(matern(1e-12, &p), 2.5, max_relative = 1e-6);
        assert_eq!(matern(-0.7, &p), matern(0.7, &p));
    }

    #[test]
    fn range_parametrization() {
        let p = MaternParams::from_range(1.4, 2.0, 1.0).unwrap();
        assert_relative_eq!(p.kappa, (2.0f64 * 1.4).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(p.rho() * p.kappa, (8.0f64 * 1.4).sqrt(), max_relative = 1e-14);
        assert_eq!(p.floor(), 1);
        assert_eq!(p.ceil(), 2);
        assert_relative_eq!(p.frac(), 0.9, epsilon = 1e-12);
        let q = MaternParams::from_range(1.5, 2.0, 1.0).unwrap();
        assert!(q.is_integer());
        assert_eq!((q.floor(), q.ceil()), (2, 2));
    }

    #[test]
    fn spectral_constant_exponential_case() {
        // ν = ½: A = 2κ, f(w) = 2κσ²/(κ²+w²)
        let p = MaternParams::new(1.0, 1.7, 1.0).unwrap();
        assert_relative_eq!(p.spectral_constant(), 2.0 * 1.7, max_relative = 1e-13);
        assert_relative_eq!(spectral_density(0.0, &p), 2.0 / 1.7, max_relative = 1e-13);
    }

    #[test]
    fn m_constant_n1() {
        assert_relative_eq!(m_constant(1, 2.3), 2.3 * PI, max_relative = 1e-14);
        assert!(m_constant(0, 1.0).is_infinite());
    }

    #[test]
    fn theory_bound_zero_for_integer_alpha() {
        let p = MaternParams::new(2.0, 1.0, 1.0).unwrap();
        assert_eq!(theory_bound_l2(3, &p, (0.0, 50.0)), 0.0);
    }

    #[test]
    fn theory_bound_decreases_in_m() {
        let p = MaternParams::from_range(1.4, 2.0, 1.0).unwrap();
        let vals: Vec<f64> = (2..=6).map(|m| theory_bound_l2(m, &p, (0.0, 50.0))).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }
}
