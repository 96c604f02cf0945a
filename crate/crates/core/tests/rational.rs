use markov_matern::rational::{
    best_rational, eval_rational, partial_fractions, reversed_polynomials, stahl_bound, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn chebyshev_grid(n: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|k| 0.5 * (1.0 - (std::f64::consts::PI * k as f64 / (n - 1) as f64).cos())).collect();
    x[0] = 0.0;
    x[n - 1] = 1.0;
    x
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

/// Brute-force discrete Remez for x^β on a fixed grid, type (m, m), monomial basis.
///
/// On each reference the levelled conditions p(x_j) − (f_j − (−1)^j E) q(x_j) = 0
/// form a pencil (A − E B)z = 0 in z = (a, b). Every real level E is tried and
/// the pole-free solution with the smallest |E| is kept; extrema are then
/// exchanged on the grid. Returns the final levelled |E|.
fn discrete_remez(beta: f64, m: usize, grid: &[f64]) -> f64 {
    let f: Vec<f64> = grid.iter().map(|x| x.powf(beta)).collect();
    let k = 2 * m + 2;
    // extrema of x^β approximants cluster geometrically towards 0
    let nodes: Vec<f64> =
        (0..k).map(|j| if j == 0 { 0.0 } else { 10f64.powf(-6.0 * (1.0 - (j - 1) as f64 / (k - 2) as f64)) }).collect();
    let mut refs: Vec<usize> = nodes
        .iter()
        .map(|t| (0..grid.len()).min_by(|&a, &b| (grid[a] - t).abs().total_cmp(&(grid[b] - t).abs())).unwrap())
        .collect();
    refs.dedup();
    assert_eq!(refs.len(), k);
    let mut level = f64::NAN;
    for _ in 0..60 {
        let mut a_mat = DMatrix::zeros(k, k);
        let mut b_mat = DMatrix::zeros(k, k);
        for (r, &j) in refs.iter().enumerate() {
            let x = grid[j];
            let s = if r % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..=m {
                a_mat[(r, i)] = x.powi(i as i32);
                a_mat[(r, m + 1 + i)] = -f[j] * x.powi(i as i32);
                b_mat[(r, m + 1 + i)] = -s * x.powi(i as i32);
            }
        }
        let inv = a_mat.clone().try_inverse().unwrap();
        let mus = (&inv * &b_mat).complex_eigenvalues();
        let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
        for mu in mus.iter() {
            if mu.im.abs() > 1e-9 * mu.re.abs() || mu.re.abs() < 1e-300 {
                continue;
            }
            let e = 1.0 / mu.re;
            let svd = (&a_mat - &b_mat * e).svd(false, true);
            let v_t = svd.v_t.unwrap();
            let imin = svd.singular_values.imin();
            let z: Vec<f64> = v_t.row(imin).iter().copied().collect();
            let (a, b) = (z[..=m].to_vec(), z[m + 1..].to_vec());
            let q0 = poly(&b, 0.0);
            if grid.iter().any(|&x| poly(&b, x) * q0 <= 0.0) {
                continue;
            }
            if best.as_ref().is_none_or(|(be, _, _)| e.abs() < be.abs()) {
                best = Some((e, a, b));
            }
        }
        let (e, a, b) = best.expect("no pole-free levelled solution");
        level = e.abs();
        let err: Vec<f64> = grid.iter().zip(&f).map(|(&x, &fx)| fx - poly(&a, x) / poly(&b, x)).collect();
        // one extremum per sign run of the error
        let mut ext: Vec<usize> = Vec::new();
        for (j, &v) in err.iter().enumerate() {
            match ext.last() {
                Some(&l) if err[l].signum() == v.signum() => {
                    if v.abs() > err[l].abs() {
                        *ext.last_mut().unwrap() = j;
                    }
                }
                _ => ext.push(j),
            }
        }
        while ext.len() > k {
            let drop = if err[ext[0]].abs() < err[*ext.last().unwrap()].abs() { 0 } else { ext.len() - 1 };
            ext.remove(drop);
        }
        let sup = err.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        if ext.len() < k || (sup - level) <= 1e-10 * level {
            break;
        }
        refs = ext;
    }
    level
}

#[test]
fn sqrt_order_three_matches_discrete_remez() {
    let grid = chebyshev_grid(2001);
    let oracle = discrete_remez(0.5, 3, &grid);
    let r = best_rational(0.5, 3, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let measured = grid.iter().map(|&x| (x.sqrt() - eval_rational(&r, x).unwrap()).abs()).fold(0.0, f64::max);
    assert!(((measured - oracle) / oracle).abs() < 5e-4, "{measured:.6e} vs oracle {oracle:.6e}");
}

#[test]
fn order_four_below_asymptotic_bound() {
    let r = best_rational(0.5, 4, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    assert!(r.sup_error <= 2.0 * stahl_bound(0.5, 4));
    assert!(r.sup_error <= 8.0 * (-2.0 * std::f64::consts::PI * 2f64.sqrt()).exp() * 2.0);
}

#[test]
fn partial_fractions_reconstruct_ratio() {
    let r = best_rational(0.5, 3, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let (p, q) = reversed_polynomials(&r);
    let pf = partial_fractions(&p, &q).unwrap();
    for i in 0..=99 {
        let x = 1.0 + i as f64;
        let direct = poly(&p, x) / poly(&q, x);
        assert!(((pf.eval(x) - direct) / direct).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sign_structure_holds(beta in 0.03f64..0.97, m in 1usize..=7) {
        let r = best_rational(beta, m, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let (p, q) = reversed_polynomials(&r);
        let pf = partial_fractions(&p, &q).unwrap();
        prop_assert!(pf.k > 0.0);
        prop_assert!(pf.c.iter().all(|&c| c > 0.0));
        prop_assert!(pf.p.iter().all(|&p| p < 0.0));
        prop_assert!(pf.p.windows(2).all(|w| w[0] > w[1]));
        prop_assert!(r.sup_error <= 2.0 * stahl_bound(beta, m) + 1e-12);
    }
}
