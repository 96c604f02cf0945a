//! Real polynomial roots through balanced companion matrices, and the
//! partial-fraction form of P/Q with simple negative poles.

use nalgebra::{DMatrix, Schur};

use super::PartialFractionForm;
use crate::error::{Error, Result};

const IMAG_TOL: f64 = 1e-9;
const REPEAT_TOL: f64 = 1e-9;

/// Horner evaluation of ascending coefficients.
pub fn horner(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Value and derivative of ascending coefficients at x.
fn horner_with_deriv(coef: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coef.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Parlett–Reinsch diagonal similarity balancing with radix 2.
fn balance(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / 2.0;
            while c < g {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while c > g {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= inv;
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Real roots of the polynomial with ascending coefficients `coef`.
///
/// Roots are eigenvalues of the balanced companion matrix, each refined by
/// Newton steps. Complex roots (relative imaginary part above 1e-9) are an error.
pub fn real_roots(coef: &[f64]) -> Result<Vec<f64>> {
    let deg = coef.len().saturating_sub(1);
    if deg == 0 {
        return Ok(vec![]);
    }
    let lead = coef[deg];
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::Roots("leading coefficient vanishes".into()));
    }
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coef[i] / lead;
    }
    balance(&mut comp);
    let schur = Schur::try_new(comp, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Roots("companion eigenvalue iteration did not converge".into()))?;
    let eig = schur.complex_eigenvalues();
    let mut roots = Vec::with_capacity(deg);
    for z in eig.iter() {
        if z.im.abs() > IMAG_TOL * z.norm().max(1.0) {
            return Err(Error::Roots(format!("complex root {} + {}i", z.re, z.im)));
        }
        let mut x = z.re;
        let (mut fx, _) = horner_with_deriv(coef, x);
        for _ in 0..3 {
            let (p, dp) = horner_with_deriv(coef, x);
            if dp == 0.0 {
                break;
            }
            let next = x - p / dp;
            let (fn_, _) = horner_with_deriv(coef, next);
            if fn_.abs() < fx.abs() {
                x = next;
                fx = fn_;
            } else {
                break;
            }
        }
        roots.push(x);
    }
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(roots)
}

/// Decomposes P/Q = k + Σ c_i/(x − p_i) for deg P = deg Q with simple real poles,
/// enforcing k > 0, c_i > 0, p_i < 0.
pub fn partial_fractions(p: &[f64], q: &[f64]) -> Result<PartialFractionForm> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::Dimension { expected: q.len().max(1), got: p.len() });
    }
    let m = q.len() - 1;
    if p[m] == 0.0 || q[m] == 0.0 {
        return Err(Error::Degenerate("numerator and denominator must both have degree m".into()));
    }
    let k = p[m] / q[m];
    let poles = real_roots(q)?;
    for w in poles.windows(2) {
        if (w[0] - w[1]).abs() <= REPEAT_TOL * w[0].abs().max(w[1].abs()) {
            return Err(Error::Roots(format!("repeated root near {}", w[0])));
        }
    }
    let mut c = Vec::with_capacity(m);
    for (i, &pi) in poles.iter().enumerate() {
        let dq = q[m]
            * poles
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &pj)| pi - pj)
                .product::<f64>();
        c.push(horner(p, pi) / dq);
    }
    if !(k > 0.0) {
        return Err(Error::SignViolation(format!("k = {k} is not positive")));
    }
    if let Some(bad) = c.iter().find(|&&ci| !(ci > 0.0)) {
        return Err(Error::SignViolation(format!("residue {bad} is not positive")));
    }
    if let Some(bad) = poles.iter().find(|&&pi| !(pi < 0.0)) {
        return Err(Error::SignViolation(format!("pole {bad} is not negative")));
    }
    Ok(PartialFractionForm { k, c, p: poles })
}
