//! Minimax refinement of x^β on [0, 1] in the Stieltjes form
//! R(y) = k + Σ s_i y/(y + q_i), with k, s_i, q_i > 0.
//!
//! Every term is non-negative on [0, 1], so the form evaluates with full
//! relative accuracy even when the q_i span many orders of magnitude (small β).
//! A BRASIL run supplies the starting point; a Newton–Remez exchange on the
//! alternation points then drives the deviation down to rounding level.

use nalgebra::{DMatrix, DVector};

use super::brasil::{brasil, local_maxima, Barycentric};
use crate::error::{Error, Result};

const BRASIL_TOL: f64 = 1e-3;
const BRASIL_BUDGET: usize = 5000;
const POLE_SCAN_POINTS: usize = 30_000;
const POLE_SCAN_LOG_RANGE: (f64, f64) = (-80.0, 6.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Stieltjes {
    pub k: f64,
    pub s: Vec<f64>,
    pub q: Vec<f64>,
}

impl Stieltjes {
    pub fn eval(&self, y: f64) -> f64 {
        self.k + self.s.iter().zip(&self.q).map(|(s, q)| s * y / (y + q)).sum::<f64>()
    }

    /// Ascending coefficients of numerator and denominator, scaled so the
    /// denominator equals 1 at y = 1. All coefficients are positive.
    pub fn polynomials(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.q.len();
        let den = product_poly(&self.q, None);
        let mut num: Vec<f64> = den.iter().map(|c| self.k * c).collect();
        for i in 0..m {
            let partial = product_poly(&self.q, Some(i));
            for (d, c) in partial.iter().enumerate() {
                num[d + 1] += self.s[i] * c;
            }
        }
        let scale: f64 = den.iter().sum();
        (num.iter().map(|c| c / scale).collect(), den.iter().map(|c| c / scale).collect())
    }
}

/// Coefficients of Π_{i ≠ skip} (y + q_i), ascending.
fn product_poly(q: &[f64], skip: Option<usize>) -> Vec<f64> {
    let mut poly = vec![1.0];
    for (i, &qi) in q.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        let mut next = vec![0.0; poly.len() + 1];
        for (d, &c) in poly.iter().enumerate() {
            next[d] += qi * c;
            next[d + 1] += c;
        }
        poly = next;
    }
    poly
}

/// Result of the Remez exchange: the Stieltjes form, the levelled error and
/// the final relative spread of |error| over the references.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimax {
    pub form: Stieltjes,
    pub error: f64,
    pub references: Vec<f64>,
    pub deviation: f64,
}

fn signed_error(form: &Stieltjes, beta: f64, y: f64) -> f64 {
    form.eval(y) - y.powf(beta)
}

/// Best uniform approximation of y^β on [0, 1] of type (m, m).
pub fn minimax(beta: f64, m: usize, tol: f64, max_iter: usize) -> Result<Minimax> {
    if m == 0 {
        let form = Stieltjes { k: 0.5, s: vec![], q: vec![] };
        return Ok(Minimax { form, error: 0.5, references: vec![0.0, 1.0], deviation: 0.0 });
    }
    let f = |x: f64| x.powf(beta);
    let start = brasil(&f, 0.0, 1.0, m, BRASIL_TOL, BRASIL_BUDGET)?;
    let q = negative_axis_poles(&start.approx, m)?;
    let mut form = fit_residues(&start.approx, q)?;

    let mut knots = vec![0.0];
    knots.extend_from_slice(&start.nodes);
    knots.push(1.0);
    let err = |x: f64| (f(x) - start.approx.eval(x)).abs();
    let (mut refs, maxima) = local_maxima(&err, &knots, 30);
    refs[0] = 0.0;
    refs[2 * m + 1] = 1.0;
    let mut level = maxima.iter().sum::<f64>() / maxima.len() as f64;

    let mut deviation = f64::INFINITY;
    for _ in 0..max_iter.max(1) {
        let (next, e) = newton(&form, level, beta, &refs)?;
        form = next;
        level = e;
        refs = exchange(&form, beta, &refs);
        let mags: Vec<f64> = refs.iter().map(|&y| signed_error(&form, beta, y).abs()).collect();
        let hi = mags.iter().cloned().fold(0.0, f64::max);
        let lo = mags.iter().cloned().fold(f64::INFINITY, f64::min);
        deviation = hi / lo - 1.0;
        if deviation < 0.01 * tol {
            break;
        }
    }
    if !(deviation <= tol) {
        return Err(Error::NoConvergence { iterations: max_iter, deviation });
    }
    check_alternation(&form, beta, &refs)?;
    if form.k <= 0.0 || form.s.iter().any(|&s| s <= 0.0) || form.q.iter().any(|&q| q <= 0.0) {
        return Err(Error::SignViolation("minimax approximant lost positivity".into()));
    }
    let error = refs.iter().map(|&y| signed_error(&form, beta, y).abs()).fold(0.0, f64::max);
    Ok(Minimax { form, error, references: refs, deviation })
}

fn check_alternation(form: &Stieltjes, beta: f64, refs: &[f64]) -> Result<()> {
    let signs: Vec<f64> = refs.iter().map(|&y| signed_error(form, beta, y).signum()).collect();
    if signs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Degenerate("error does not alternate at the reference points".into()));
    }
    Ok(())
}

/// Poles of the barycentric approximant on (−∞, 0), returned as q = −pole,
/// found by sign changes of the barycentric denominator on a logarithmic grid.
fn negative_axis_poles(r: &Barycentric, m: usize) -> Result<Vec<f64>> {
    let (lo, hi) = POLE_SCAN_LOG_RANGE;
    let point = |t: f64| -(10f64.powf(t));
    let step = (hi - lo) / (POLE_SCAN_POINTS - 1) as f64;
    let mut prev_t = lo;
    let mut prev = r.denominator(point(lo));
    let mut roots = Vec::with_capacity(m);
    for i in 1..POLE_SCAN_POINTS {
        let t = lo + i as f64 * step;
        let cur = r.denominator(point(t));
        if cur.signum() != prev.signum() {
            let (mut a, mut b) = (prev_t, t);
            for _ in 0..100 {
                let mid = 0.5 * (a + b);
                if r.denominator(point(mid)).signum() == prev.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            roots.push(10f64.powf(0.5 * (a + b)));
        }
        prev = cur;
        prev_t = t;
    }
    if roots.len() != m {
        return Err(Error::Degenerate(format!(
            "found {} poles on the negative axis, expected {m}",
            roots.len()
        )));
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(roots)
}

/// Least-squares fit of k and s_i to the barycentric approximant for fixed q_i.
fn fit_residues(r: &Barycentric, q: Vec<f64>) -> Result<Stieltjes> {
    let m = q.len();
    let lo = (q[0].log10() - 10.0).min(-40.0);
    let npts = 400;
    let mut ys = vec![0.0];
    ys.extend((0..npts).map(|i| 10f64.powf(lo + (0.0 - lo) * i as f64 / (npts - 1) as f64)));
    let a = DMatrix::from_fn(ys.len(), m + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            ys[i] / (ys[i] + q[j - 1])
        }
    });
    let b = DVector::from_iterator(ys.len(), ys.iter().map(|&y| r.eval(y)));
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Degenerate(format!("residue fit failed: {e}")))?;
    Ok(Stieltjes { k: sol[0], s: sol.iter().skip(1).copied().collect(), q })
}

/// Newton solve of k + Σ s_i y_j/(y_j + q_i) − y_j^β = (−1)^j E at the references,
/// in unknowns (k, s, ln q, E).
fn newton(form: &Stieltjes, level: f64, beta: f64, refs: &[f64]) -> Result<(Stieltjes, f64)> {
    let m = form.q.len();
    let n = 2 * m + 2;
    let mut x = DVector::zeros(n);
    x[0] = form.k;
    for i in 0..m {
        x[1 + i] = form.s[i];
        x[1 + m + i] = form.q[i].ln();
    }
    x[n - 1] = level;

    let residual = |x: &DVector<f64>| -> DVector<f64> {
        DVector::from_fn(n, |j, _| {
            let y = refs[j];
            let mut v = x[0] - y.powf(beta);
            for i in 0..m {
                v += x[1 + i] * y / (y + x[1 + m + i].exp());
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            v - sign * x[n - 1]
        })
    };

    let mut f = residual(&x);
    for _ in 0..50 {
        let mut jac = DMatrix::zeros(n, n);
        for (j, &y) in refs.iter().enumerate() {
            jac[(j, 0)] = 1.0;
            for i in 0..m {
                let q = x[1 + m + i].exp();
                jac[(j, 1 + i)] = y / (y + q);
                jac[(j, 1 + m + i)] = -x[1 + i] * y * q / ((y + q) * (y + q));
            }
            jac[(j, n - 1)] = if j % 2 == 0 { -1.0 } else { 1.0 };
        }
        let dx = jac
            .lu()
            .solve(&(-&f))
            .ok_or_else(|| Error::Degenerate("singular Remez system".into()))?;
        let norm0 = f.amax();
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let trial = &x + &dx * t;
            let ft = residual(&trial);
            if ft.iter().all(|v| v.is_finite()) && ft.amax() <= norm0 {
                x = trial;
                f = ft;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || (dx.amax() * t) < 1e-15 * x.amax().max(1.0) {
            break;
        }
    }
    let out = Stieltjes {
        k: x[0],
        s: (0..m).map(|i| x[1 + i]).collect(),
        q: (0..m).map(|i| x[1 + m + i].exp()).collect(),
    };
    if !out.k.is_finite() || out.s.iter().chain(&out.q).any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("Remez iteration diverged".into()));
    }
    Ok((out, x[n - 1].abs()))
}

fn bisect_log<F: Fn(f64) -> f64>(g: &F, mut a: f64, mut b: f64) -> f64 {
    let sa = g(a).signum();
    for _ in 0..300 {
        let mid = if a > 0.0 { (a * b).sqrt() } else { 0.5 * (a + b) };
        if mid <= a || mid >= b {
            break;
        }
        if g(mid).signum() == sa {
            a = mid;
        } else {
            b = mid;
        }
    }
    if a > 0.0 {
        (a * b).sqrt()
    } else {
        0.5 * (a + b)
    }
}

fn golden_max_log<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64) -> f64 {
    let ratio = 0.618_033_988_749_894_9;
    let logscale = a > 0.0;
    let map = |t: f64| if logscale { t.exp() } else { t };
    let (mut lo, mut hi) = if logscale { (a.ln(), b.ln()) } else { (a, b) };
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let mut fc = g(map(c));
    let mut fd = g(map(d));
    for _ in 0..100 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = g(map(c));
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = g(map(d));
        }
    }
    map(0.5 * (lo + hi))
}

/// New references: zeros of the error between the current references bound the
/// intervals; each interior interval contributes its extremum, endpoints stay.
fn exchange(form: &Stieltjes, beta: f64, refs: &[f64]) -> Vec<f64> {
    let e = |y: f64| signed_error(form, beta, y);
    let n = refs.len();
    let mut bounds = vec![0.0];
    for j in 0..n - 1 {
        bounds.push(bisect_log(&e, refs[j], refs[j + 1]));
    }
    bounds.push(1.0);
    let abs_e = |y: f64| e(y).abs();
    (0..n)
        .map(|j| {
            if j == 0 {
                0.0
            } else if j == n - 1 {
                1.0
            } else {
                golden_max_log(&abs_e, bounds[j], bounds[j + 1])
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_match_form() {
        let form = Stieltjes { k: 0.01, s: vec![0.3, 1.2], q: vec![1e-6, 0.4] };
        let (a, b) = form.polynomials();
        let horner = |c: &[f64], y: f64| c.iter().rev().fold(0.0, |acc, v| acc * y + v);
        assert_relative_eq!(b.iter().sum::<f64>(), 1.0, max_relative = 1e-15);
        for &y in &[0.0, 1e-7, 0.3, 1.0] {
            assert_relative_eq!(horner(&a, y) / horner(&b, y), form.eval(y), max_relative = 1e-13);
        }
    }

    #[test]
    fn sqrt_order_three_error_level() {
        let res = minimax(0.5, 3, 1e-8, 100).unwrap();
        assert!(res.deviation <= 1e-8);
        // frozen from an independent reference solve
        assert_relative_eq!(res.error, 2.282e-3, max_relative = 1e-3);
    }
}
