//! Half-integer Matérn terms ϱ(h; j − ½, κ, 1) = e^{−κ|h|}·B(κ|h|) with B a
//! polynomial of degree j − 1, and their derivatives of any order.

use crate::error::{Error, Result};

const MAX_DEGREE: usize = 24;

/// One weighted half-integer Matérn term, smoothness ν = j − ½.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfIntMaternTerm {
    pub j: usize,
    pub kappa_term: f64,
    pub weight: f64,
}

/// A derivative value at lag 0 together with whether it is only a one-sided limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivValue {
    pub value: f64,
    pub one_sided: bool,
}

impl HalfIntMaternTerm {
    pub fn new(j: usize, kappa_term: f64, weight: f64) -> Result<Self> {
        if j == 0 || j > MAX_DEGREE {
            return Err(Error::InvalidArgument(format!("term index j must be in 1..={MAX_DEGREE}, got {j}")));
        }
        if !(kappa_term > 0.0 && kappa_term.is_finite()) {
            return Err(Error::InvalidArgument(format!("term kappa must be positive, got {kappa_term}")));
        }
        if !weight.is_finite() {
            return Err(Error::InvalidArgument("term weight must be finite".into()));
        }
        Ok(Self { j, kappa_term, weight })
    }

    /// Highest derivative order with a (possibly one-sided) limit at 0.
    pub fn max_order_at_zero(&self) -> usize {
        2 * self.j - 1
    }

    /// d-th derivative at h, taking the right limit at h = 0 regardless of order.
    pub fn deriv_right_limit(&self, d: usize, h: f64) -> f64 {
        let p = self.j - 1;
        let mut coef = [0.0; MAX_DEGREE];
        base_poly(p, &mut coef);
        // d/dx [e^{−x} B(x)] = e^{−x} (B' − B)
        for _ in 0..d {
            for k in 0..=p {
                let deriv = if k < p { (k + 1) as f64 * coef[k + 1] } else { 0.0 };
                coef[k] = deriv - coef[k];
            }
        }
        let x = self.kappa_term * h.abs();
        let mut poly = 0.0;
        for k in (0..=p).rev() {
            poly = poly * x + coef[k];
        }
        let sign = if h < 0.0 && d % 2 == 1 { -1.0 } else { 1.0 };
        sign * self.weight * self.kappa_term.powi(d as i32) * (-x).exp() * poly
    }

    pub fn value(&self, h: f64) -> f64 {
        self.deriv_right_limit(0, h)
    }
}

/// Coefficients of B(x) = p!/(2p)! Σ_i (p+i)!/(i!(p−i)!) (2x)^{p−i}, ascending in x.
fn base_poly(p: usize, coef: &mut [f64; MAX_DEGREE]) {
    let fact = |n: usize| (1..=n).fold(1.0f64, |acc, k| acc * k as f64);
    let lead = fact(p) / fact(2 * p);
    for i in 0..=p {
        let k = p - i;
        coef[k] = lead * fact(p + i) / (fact(i) * fact(p - i)) * 2f64.powi(k as i32);
    }
}

/// d-th derivative of weight·ϱ(|h|; j − ½, κ_term, 1) at h.
///
/// At h = 0 the right limit is returned; orders above 2j − 1 do not have one
/// and are rejected.
pub fn half_int_matern_deriv(d: usize, h: f64, term: &HalfIntMaternTerm) -> Result<f64> {
    half_int_matern_deriv_marked(d, h, term).map(|v| v.value)
}

/// As [`half_int_matern_deriv`], flagging values at h = 0 that are only one-sided.
pub fn half_int_matern_deriv_marked(d: usize, h: f64, term: &HalfIntMaternTerm) -> Result<DerivValue> {
    if h == 0.0 {
        if d > term.max_order_at_zero() {
            return Err(Error::NotSmooth { order: d, j: term.j });
        }
        return Ok(DerivValue {
            value: term.deriv_right_limit(d, 0.0),
            one_sided: d == term.max_order_at_zero(),
        });
    }
    Ok(DerivValue { value: term.deriv_right_limit(d, h), one_sided: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn closed_forms() {
        let t = HalfIntMaternTerm::new(3, 1.3, 2.0).unwrap();
        let x: f64 = 1.3 * 0.8;
        assert_relative_eq!(t.value(0.8), 2.0 * (1.0 + x + x * x / 3.0) * (-x).exp(), max_relative = 1e-14);
        assert_eq!(t.value(0.0), 2.0);
    }

    #[test]
    fn lag_zero_derivatives() {
        let t = HalfIntMaternTerm::new(1, 0.7, 1.0).unwrap();
        assert_eq!(half_int_matern_deriv(0, 0.0, &t).unwrap(), 1.0);
        let d1 = half_int_matern_deriv_marked(1, 0.0, &t).unwrap();
        assert_relative_eq!(d1.value, -0.7, max_relative = 1e-15);
        assert!(d1.one_sided);
        assert!(matches!(half_int_matern_deriv(2, 0.0, &t), Err(Error::NotSmooth { .. })));

        let t = HalfIntMaternTerm::new(2, 1.9, 1.0).unwrap();
        assert_relative_eq!(half_int_matern_deriv(2, 0.0, &t).unwrap(), -1.9 * 1.9, max_relative = 1e-14);
        assert_eq!(half_int_matern_deriv(1, 0.0, &t).unwrap(), 0.0);
        assert!(half_int_matern_deriv_marked(3, 0.0, &t).unwrap().one_sided);
    }

    #[test]
    fn second_derivative_matches_richardson_differences() {
        // oracle: Richardson-extrapolated central differences of the value; the
        // third derivative jumps at 0, so the leading error term is O(h)
        let t = HalfIntMaternTerm::new(2, 1.2, 1.0).unwrap();
        let fd = |h: f64| (t.value(h) - 2.0 * t.value(0.0) + t.value(-h)) / (h * h);
        let rich = 2.0 * fd(5e-4) - fd(1e-3);
        assert_relative_eq!(half_int_matern_deriv(2, 0.0, &t).unwrap(), rich, max_relative = 1e-5);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for j in 1..=4 {
            let t = HalfIntMaternTerm::new(j, 0.9, 1.7).unwrap();
            for &h in &[0.1, 0.5, 2.0] {
                for d in 0..4 {
                    let step = 1e-4;
                    let fd = (t.deriv_right_limit(d, h + step) - t.deriv_right_limit(d, h - step)) / (2.0 * step);
                    let exact = half_int_matern_deriv(d + 1, h, &t).unwrap();
                    let scale = exact.abs().max(t.deriv_right_limit(d, h).abs()).max(1e-3);
                    assert!((fd - exact).abs() < 1e-6 * scale, "j={j} h={h} d={d}: {fd} vs {exact}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn parity(j in 1usize..5, d in 0usize..6, h in 0.01f64..5.0, kappa in 0.1f64..4.0) {
            let t = HalfIntMaternTerm::new(j, kappa, 1.0).unwrap();
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            let a = half_int_matern_deriv(d, -h, &t).unwrap();
            let b = half_int_matern_deriv(d, h, &t).unwrap();
            prop_assert!((a - sign * b).abs() <= 1e-14 * b.abs().max(1e-300));
        }
    }
}
