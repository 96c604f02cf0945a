use std::time::Instant;

use markov_matern::decomposition::{decompose_with, rational_form, total_cov};
use markov_matern::kernels::MaternParams;
use markov_matern::oracle::approx_cov_by_quadrature;

fn check(nu: f64, m: usize, lags: &[f64]) {
    let params = MaternParams::from_range(nu, 2.0, 1.0).unwrap();
    let pf = rational_form(&params, m).unwrap();
    let comps = decompose_with(&params, &pf).unwrap();
    let nugget: f64 = comps.iter().map(|c| c.nugget_variance).sum();
    for &h in lags {
        let closed = total_cov(&comps, h) - if h == 0.0 { nugget } else { 0.0 };
        let quad = approx_cov_by_quadrature(&params, &pf, h).unwrap();
        assert!((closed - quad).abs() < 1e-6, "nu={nu} m={m} h={h}: {closed} vs {quad}");
    }
}

#[test]
fn closed_form_matches_fourier_inversion() {
    let t = Instant::now();
    check(0.4, 3, &[0.0, 0.5, 4.0]);
    check(1.4, 4, &[0.0, 1.0, 10.0]);
    check(2.4, 2, &[0.0, 2.5]);
    eprintln!("elapsed {:?}", t.elapsed());
}
