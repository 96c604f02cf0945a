//! Splits the rational-approximate Matérn covariance into m + 1 independent
//! Markov components, each a signed sum of half-integer Matérn terms, and
//! evaluates the derivative cross-covariance blocks of their state vectors.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::{gamma_ratio, HalfIntMaternTerm, MaternParams};
use crate::quadrature::gauss_legendre_unit;
use crate::rational::{best_rational, partial_fractions, reversed_polynomials, PartialFractionForm, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// Relative residual allowed when odd derivatives of a component cancel at lag 0.
pub const CANCELLATION_TOL: f64 = 1e-9;

/// Poles with |p| below this use the mixture representation of a component.
pub const MIXTURE_POLE_LIMIT: f64 = 1.0;

/// Quadrature nodes in the mixture representation.
pub const MIXTURE_NODES: usize = 24;

/// Covariance of one Markov component u_i.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentKernel {
    pub index: usize,
    pub terms: Vec<HalfIntMaternTerm>,
    pub nugget_variance: f64,
    pub state_dim: usize,
    pub markov_order: usize,
}

/// Neumaier-compensated sum.
fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

impl ComponentKernel {
    /// ϱ_{m,i,α}(h); the nugget contributes only at h = 0.
    pub fn cov(&self, h: f64) -> f64 {
        let base = compensated_sum(self.terms.iter().map(|t| t.value(h)));
        if h == 0.0 {
            base + self.nugget_variance
        } else {
            base
        }
    }

    /// d-th derivative of the component covariance at lag h.
    ///
    /// At h = 0 odd orders must cancel across terms; they are checked and
    /// returned as exactly zero.
    pub fn deriv(&self, d: usize, h: f64) -> Result<f64> {
        if d == 0 {
            return Ok(self.cov(h));
        }
        let parts: Vec<f64> = self.terms.iter().map(|t| t.deriv_right_limit(d, h)).collect();
        let total = compensated_sum(parts.iter().copied());
        if h == 0.0 && d % 2 == 1 {
            // term magnitudes |w|κ^d; the derivative values themselves may all vanish
            let scale: f64 = self.terms.iter().map(|t| t.weight.abs() * t.kappa_term.powi(d as i32)).sum();
            if total.abs() > CANCELLATION_TOL * scale {
                return Err(Error::Cancellation { order: d, residual: total.abs() / scale });
            }
            return Ok(0.0);
        }
        Ok(total)
    }

    pub fn variance(&self) -> f64 {
        self.cov(0.0)
    }
}

/// Cross-covariance of the stacked derivative state [u, u', ..., u^{(p−1)}].
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCovSpec {
    pub component: ComponentKernel,
}

impl CrossCovSpec {
    pub fn new(component: ComponentKernel) -> Self {
        Self { component }
    }

    pub fn dim(&self) -> usize {
        self.component.state_dim
    }

    /// p×p block r(s, t) with entry (k, ℓ) = (−1)^{ℓ−1} ϱ^{(k+ℓ−2)}(s − t), 1-based.
    pub fn block(&self, s: f64, t: f64) -> Result<DMatrix<f64>> {
        let p = self.dim();
        let h = s - t;
        let mut derivs = vec![0.0; 2 * p - 1];
        for (d, v) in derivs.iter_mut().enumerate() {
            *v = self.component.deriv(d, h)?;
        }
        Ok(DMatrix::from_fn(p, p, |k, l| {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            sign * derivs[k + l]
        }))
    }
}

/// Convenience wrapper for [`CrossCovSpec::block`].
pub fn cross_cov_block(spec: &CrossCovSpec, s: f64, t: f64) -> Result<DMatrix<f64>> {
    spec.block(s, t)
}

/// Partial-fraction form of the best order-m approximation of x^{α}, fractional part.
pub fn rational_form(params: &MaternParams, m: usize) -> Result<PartialFractionForm> {
    let r = best_rational(params.frac(), m, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let (p, q) = reversed_polynomials(&r);
    partial_fractions(&p, &q)
}

/// The m + 1 Markov components of the order-m approximation.
pub fn decompose(params: &MaternParams, m: usize) -> Result<Vec<ComponentKernel>> {
    if params.is_integer() {
        return Err(Error::InvalidArgument(
            "integer smoothness is exactly Markov; use exact_component".into(),
        ));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("order m must be at least 1".into()));
    }
    let pf = rational_form(params, m)?;
    decompose_with(params, &pf)
}

/// As [`decompose`], for a precomputed partial-fraction form.
pub fn decompose_with(params: &MaternParams, pf: &PartialFractionForm) -> Result<Vec<ComponentKernel>> {
    if params.is_integer() {
        return Err(Error::InvalidArgument("integer smoothness has no rational part".into()));
    }
    if !(pf.k > 0.0) || pf.c.iter().any(|&c| !(c > 0.0)) || pf.p.iter().any(|&p| !(p < 0.0)) {
        return Err(Error::SignViolation("partial-fraction form violates k, c > 0, p < 0".into()));
    }
    let sigma2 = params.sigma2;
    let kappa = params.kappa;
    let fl = params.floor();
    let c_alpha = gamma_ratio(params.alpha);
    let mut out = Vec::with_capacity(pf.m() + 1);

    if fl == 0 {
        out.push(ComponentKernel {
            index: 0,
            terms: vec![],
            nugget_variance: pf.k * sigma2 * c_alpha * (4.0 * PI).sqrt() / kappa,
            state_dim: 1,
            markov_order: 1,
        });
    } else {
        let w = pf.k * sigma2 * c_alpha / gamma_ratio(fl as f64);
        out.push(ComponentKernel {
            index: 0,
            terms: vec![HalfIntMaternTerm::new(fl, kappa, w)?],
            nugget_variance: 0.0,
            state_dim: fl,
            markov_order: fl,
        });
    }

    for (i, (&c, &p)) in pf.c.iter().zip(&pf.p).enumerate() {
        let scale = c * sigma2 * c_alpha;
        let terms = if fl > 0 && p.abs() < MIXTURE_POLE_LIMIT {
            mixture_terms(fl, kappa, p, scale)?
        } else {
            closed_form_terms(fl, kappa, p, scale)?
        };
        let comp = ComponentKernel {
            index: i + 1,
            terms,
            nugget_variance: 0.0,
            state_dim: params.ceil(),
            markov_order: params.ceil(),
        };
        let var = comp.variance();
        if !(var > 0.0 && var.is_finite()) {
            return Err(Error::Degenerate(format!("component {} has non-positive variance {var}", i + 1)));
        }
        out.push(comp);
    }
    Ok(out)
}

/// Component with spectral shape x^{−n}/(x − p) as an exponential term at
/// κ√(1 − p) minus n half-integer terms at κ, by partial fractions in x.
fn closed_form_terms(n: usize, kappa: f64, p: f64, scale: f64) -> Result<Vec<HalfIntMaternTerm>> {
    let shift = (1.0 - p).sqrt();
    let exp_weight = scale * PI.sqrt() / shift;
    let mut terms = Vec::with_capacity(n + 1);
    terms.push(HalfIntMaternTerm::new(1, kappa * shift, exp_weight * p.powi(-(n as i32)))?);
    for j in 1..=n {
        let w = -scale * p.powi(-((n + 1 - j) as i32)) / gamma_ratio(j as f64);
        terms.push(HalfIntMaternTerm::new(j, kappa, w)?);
    }
    Ok(terms)
}

/// Component with spectral shape x^{−n}/(x − p) as a positive mixture of
/// order-(n+1) half-integer terms.
///
/// 1/(x^n (x − p)) = ∫₀¹ n(1−t)^{n−1} (x − tp)^{−(n+1)} dt, and x − tp is the
/// shape of a Matérn term with inverse range κ√(1 − tp). For poles near zero
/// this avoids the cancellation between the p^{−n}-sized weights of the
/// closed form.
fn mixture_terms(n: usize, kappa: f64, p: f64, scale: f64) -> Result<Vec<HalfIntMaternTerm>> {
    let (nodes, weights) = gauss_legendre_unit(MIXTURE_NODES);
    let base = scale / gamma_ratio((n + 1) as f64);
    nodes
        .iter()
        .zip(&weights)
        .map(|(&t, &g)| {
            let s = 1.0 - t * p;
            let w = base * g * n as f64 * (1.0 - t).powi(n as i32 - 1) * s.powf(-((2 * n + 1) as f64) / 2.0);
            HalfIntMaternTerm::new(n + 1, kappa * s.sqrt(), w)
        })
        .collect()
}

/// The Matérn kernel itself for integer α, which is already Markov of order α.
pub fn exact_component(params: &MaternParams) -> Result<ComponentKernel> {
    if !params.is_integer() {
        return Err(Error::InvalidArgument(format!("alpha = {} is not an integer", params.alpha)));
    }
    let n = params.floor();
    Ok(ComponentKernel {
        index: 0,
        terms: vec![HalfIntMaternTerm::new(n, params.kappa, params.sigma2)?],
        nugget_variance: 0.0,
        state_dim: n,
        markov_order: n,
    })
}

/// Components for any α: the exact kernel for integer α, else the order-m split.
pub fn components(params: &MaternParams, m: usize) -> Result<Vec<ComponentKernel>> {
    if params.is_integer() {
        Ok(vec![exact_component(params)?])
    } else {
        decompose(params, m)
    }
}

/// ϱ_{m,α}(h) summed over precomputed components.
pub fn total_cov(components: &[ComponentKernel], h: f64) -> f64 {
    compensated_sum(components.iter().map(|c| c.cov(h)))
}

/// ϱ_{m,α}(h), the covariance of the order-m approximation.
pub fn approx_cov(params: &MaternParams, m: usize, h: f64) -> Result<f64> {
    Ok(total_cov(&components(params, m)?, h))
}
