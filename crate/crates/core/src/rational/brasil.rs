//! BRASIL: best rational approximation by successive interval length
//! adjustment, for type-(m, m) approximants on an interval.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// Rational function in barycentric form r(x) = Σ w f/(x − z) / Σ w/(x − z).
#[derive(Debug, Clone)]
pub struct Barycentric {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Barycentric {
    pub fn eval(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&z, &f), &w) in self.nodes.iter().zip(&self.values).zip(&self.weights) {
            let d = x - z;
            if d == 0.0 {
                return f;
            }
            num += w * f / d;
            den += w / d;
        }
        num / den
    }

    /// Denominator Σ w/(x − z); its zeros off the node set are the poles of r.
    pub fn denominator(&self, x: f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w / (x - z)).sum()
    }
}

/// Type-(m, m) rational interpolant through 2m + 1 nodes (Loewner null vector).
pub fn interpolate(nodes: &[f64], values: &[f64]) -> Barycentric {
    let xa: Vec<f64> = nodes.iter().step_by(2).copied().collect();
    let va: Vec<f64> = values.iter().step_by(2).copied().collect();
    let xb: Vec<f64> = nodes.iter().skip(1).step_by(2).copied().collect();
    let vb: Vec<f64> = values.iter().skip(1).step_by(2).copied().collect();
    let m = xb.len();
    if m == 0 {
        return Barycentric { nodes: xa, values: va, weights: vec![1.0] };
    }
    // Null vector of the m×(m+1) Loewner matrix: the last column of the full
    // orthogonal factor of its transpose (padded square with a zero column).
    let mut lt = DMatrix::<f64>::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..=m {
            lt[(j, i)] = (vb[i] - va[j]) / (xb[i] - xa[j]);
        }
    }
    let q = lt.qr().q();
    let weights = q.column(m).iter().copied().collect();
    Barycentric { nodes: xa, values: va, weights }
}

fn golden_search<F: Fn(f64) -> f64>(g: &F, mut a: f64, mut c: f64, iters: usize) -> (f64, f64) {
    let mut b = 0.5 * (a + c);
    let mut gb = g(b);
    if !(gb >= g(a) && gb >= g(c)) {
        return boundary_search(g, a, c, iters);
    }
    for _ in 0..iters {
        let mid = 0.5 * (a + c);
        let x = if b > mid { b + GOLDEN * (a - b) } else { b + GOLDEN * (c - b) };
        let gx = g(x);
        if gx > gb {
            if x > b {
                a = b;
            } else {
                c = b;
            }
            b = x;
            gb = gx;
        } else if x < b {
            a = x;
        } else {
            c = x;
        }
    }
    (b, gb)
}

fn boundary_search<F: Fn(f64) -> f64>(g: &F, a: f64, c: f64, iters: usize) -> (f64, f64) {
    let mut xs = [a, c];
    let mut gs = [g(a), g(c)];
    let max_side = if gs[0] >= gs[1] { 0 } else { 1 };
    let other = 1 - max_side;
    for k in 0..iters {
        let xm = 0.5 * (xs[0] + xs[1]);
        let gm = g(xm);
        if gm < gs[max_side] {
            xs[other] = xm;
            gs[other] = gm;
        } else {
            return golden_search(g, xs[0], xs[1], iters - k);
        }
    }
    (xs[max_side], gs[max_side])
}

/// Location and size of the largest |error| on each interval between
/// consecutive entries of `knots` (endpoints included).
pub fn local_maxima<F: Fn(f64) -> f64>(g: &F, knots: &[f64], iters: usize) -> (Vec<f64>, Vec<f64>) {
    let k = knots.len() - 1;
    let mut xs = Vec::with_capacity(k);
    let mut gs = Vec::with_capacity(k);
    for i in 0..k {
        // the outermost intervals usually peak at the endpoint, so they get no bracket
        let (x, v) = if i == 0 || i == k - 1 {
            boundary_search(g, knots[i], knots[i + 1], iters.min(3).max(1))
        } else {
            golden_search(g, knots[i], knots[i + 1], iters)
        };
        xs.push(x);
        gs.push(v);
    }
    (xs, gs)
}

pub struct BrasilResult {
    pub approx: Barycentric,
    pub nodes: Vec<f64>,
    pub deviation: f64,
    pub iterations: usize,
}

/// Runs BRASIL for f on [a, b] to relative deviation `tol` among local maxima.
pub fn brasil<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, m: usize, tol: f64, max_iter: usize) -> Result<BrasilResult> {
    const INIT_STEPS: usize = 100;
    const MAX_STEP: f64 = 0.1;
    const STEP_FACTOR: f64 = 0.1;
    const SEARCH_ITERS: usize = 30;

    let nn = 2 * m + 1;
    let mut nodes: Vec<f64> = (1..=nn)
        .map(|i| {
            let t = (2 * i - 1) as f64 / (2 * nn) as f64 * std::f64::consts::PI;
            a + (1.0 - t.cos()) * 0.5 * (b - a)
        })
        .collect();
    let mut deviation = f64::INFINITY;

    for it in 0..INIT_STEPS + max_iter {
        let values: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
        let r = interpolate(&nodes, &values);
        let mut knots = Vec::with_capacity(nn + 2);
        knots.push(a);
        knots.extend_from_slice(&nodes);
        knots.push(b);
        let err = |x: f64| (f(x) - r.eval(x)).abs();
        let (max_x, max_v) = local_maxima(&err, &knots, SEARCH_ITERS);
        let hi = max_v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = max_v.iter().cloned().fold(f64::INFINITY, f64::min);
        if !hi.is_finite() {
            return Err(Error::Degenerate("interpolant is not finite on the interval".into()));
        }
        deviation = hi / lo - 1.0;
        if deviation <= tol {
            return Ok(BrasilResult { approx: r, nodes, deviation, iterations: it });
        }

        if it < INIT_STEPS {
            // move the node next to the smallest-error interval toward the largest error
            let imax = argmax(&max_v);
            let mut target = max_x[imax];
            if target == a {
                target = (3.0 * a + nodes[0]) / 4.0;
            } else if target == b {
                target = (nodes[nn - 1] + 3.0 * b) / 4.0;
            }
            let imin = argmin(&max_v);
            let j = if imin == 0 {
                0
            } else if imin == nn {
                nn - 1
            } else if (target - nodes[imin - 1]).abs() < (target - nodes[imin]).abs() {
                imin
            } else {
                imin - 1
            };
            nodes[j] = target;
            nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
        } else {
            let mean = max_v.iter().sum::<f64>() / max_v.len() as f64;
            let max_dev = max_v.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
            let step = MAX_STEP.min(STEP_FACTOR * max_dev / mean);
            let mut lengths: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
            for (len, v) in lengths.iter_mut().zip(&max_v) {
                *len *= (1.0 - step).powf((v - mean) / max_dev);
            }
            let total: f64 = lengths.iter().sum();
            let mut acc = a;
            for (node, len) in nodes.iter_mut().zip(&lengths) {
                acc += len * (b - a) / total;
                *node = acc;
            }
        }
    }
    Err(Error::NoConvergence { iterations: INIT_STEPS + max_iter, deviation })
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |best, i| if v[i] > v[best] { i } else { best })
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |best, i| if v[i] < v[best] { i } else { best })
}
