//! Best uniform rational approximation of x^β on [0, 1] and its
//! partial-fraction decomposition.

mod brasil;
mod poly;
mod remez;

pub use brasil::{brasil, interpolate, Barycentric, BrasilResult};
pub use poly::{horner, partial_fractions, real_roots};
pub use remez::{minimax, Minimax, Stieltjes};

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const MAX_ORDER: usize = 16;

/// R(x) = Σ a_i x^i / Σ b_i x^i approximating x^β on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct RationalApproximant {
    pub beta: f64,
    pub m: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub sup_error: f64,
    form: Option<Stieltjes>,
    references: Vec<f64>,
}

impl RationalApproximant {
    /// Wraps user-supplied coefficients; `sup_error` is measured on a grid.
    pub fn from_coefficients(beta: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::Dimension { expected: b.len().max(1), got: a.len() });
        }
        let m = a.len() - 1;
        let mut r = Self { beta, m, a, b, sup_error: 0.0, form: None, references: vec![] };
        r.sup_error = r.grid_error()?;
        Ok(r)
    }

    /// The positive form k + Σ s_i x/(x + q_i), when built by [`best_rational`].
    pub fn stieltjes(&self) -> Option<&Stieltjes> {
        self.form.as_ref()
    }

    /// Alternation points of the error, when built by [`best_rational`].
    pub fn references(&self) -> &[f64] {
        &self.references
    }

    /// Signed error x^β − R(x).
    pub fn error_at(&self, x: f64) -> Result<f64> {
        Ok(x.powf(self.beta) - eval_rational(self, x)?)
    }

    /// Relative spread max/min − 1 of |error| over the alternation points.
    pub fn equioscillation_deviation(&self) -> Result<f64> {
        let mags = self
            .references
            .iter()
            .map(|&x| self.error_at(x).map(f64::abs))
            .collect::<Result<Vec<_>>>()?;
        let hi = mags.iter().cloned().fold(0.0, f64::max);
        let lo = mags.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(hi / lo - 1.0)
    }

    fn grid_error(&self) -> Result<f64> {
        // Chebyshev–Lobatto points, endpoints included
        let n = 10 * (2 * self.m + 2);
        let mut worst = 0.0f64;
        for i in 0..=n {
            let x = 0.5 * (1.0 - (PI * i as f64 / n as f64).cos());
            worst = worst.max(self.error_at(x)?.abs());
        }
        for &x in &self.references {
            worst = worst.max(self.error_at(x)?.abs());
        }
        Ok(worst)
    }
}

/// Minimax rational approximant of type (m, m) to x^β on [0, 1].
///
/// `tol` bounds the relative spread of the error extrema; `max_iter` bounds the
/// exchange iterations that follow the initial BRASIL run.
pub fn best_rational(beta: f64, m: usize, tol: f64, max_iter: usize) -> Result<RationalApproximant> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidArgument(format!("beta must lie in (0, 1), got {beta}")));
    }
    if m > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("order m = {m} exceeds {MAX_ORDER}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let mm = remez::minimax(beta, m, tol, max_iter)?;
    let (a, b) = mm.form.polynomials();
    if a[m] == 0.0 || b[m] == 0.0 {
        return Err(Error::Degenerate("approximant has degree below m".into()));
    }
    let mut r = RationalApproximant { beta, m, a, b, sup_error: 0.0, form: Some(mm.form), references: mm.references };
    r.sup_error = r.grid_error()?.max(mm.error);
    Ok(r)
}

/// Σ a_i x^i / Σ b_i x^i by Horner recurrences.
pub fn eval_rational(r: &RationalApproximant, x: f64) -> Result<f64> {
    let den = horner(&r.b, x);
    if !den.is_finite() || den.abs() < f64::MIN_POSITIVE {
        return Err(Error::PoleProximity(x));
    }
    Ok(horner(&r.a, x) / den)
}

/// P_m(x) = Σ a_i x^{m−i} and Q_m(x) = Σ b_i x^{m−i}, as ascending coefficients.
pub fn reversed_polynomials(r: &RationalApproximant) -> (Vec<f64>, Vec<f64>) {
    (r.a.iter().rev().copied().collect(), r.b.iter().rev().copied().collect())
}

/// 4^{β+1}|sin πβ| e^{−2π√(βm)}.
pub fn stahl_bound(beta: f64, m: usize) -> f64 {
    4f64.powf(beta + 1.0) * (PI * beta).sin().abs() * (-2.0 * PI * (beta * m as f64).sqrt()).exp()
}

/// P_m/Q_m = k + Σ c_i/(x − p_i), with k, c_i > 0 and poles p_i < 0 strictly decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFractionForm {
    pub k: f64,
    pub c: Vec<f64>,
    pub p: Vec<f64>,
}

impl PartialFractionForm {
    pub fn m(&self) -> usize {
        self.c.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.k + self.c.iter().zip(&self.p).map(|(c, p)| c / (x - p)).sum::<f64>()
    }

    /// Builds the form directly from the positive Stieltjes parametrization.
    pub fn from_stieltjes(form: &Stieltjes) -> Self {
        // s y/(y + q) with y = 1/x equals (s/q)/(x + 1/q)
        let mut pairs: Vec<(f64, f64)> = form.s.iter().zip(&form.q).map(|(s, q)| (s / q, -1.0 / q)).collect();
        pairs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        Self { k: form.k, c: pairs.iter().map(|p| p.0).collect(), p: pairs.iter().map(|p| p.1).collect() }
    }
}
