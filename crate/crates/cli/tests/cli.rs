use std::process::Command;

use markov_matern::decomposition::{components, total_cov};
use markov_matern::gp::{build_joint, sample_derivatives};
use markov_matern::kernels::MaternParams;
use markov_matern_cli::run_args;
use markov_matern_cli::studies::{self, KlMode};

fn csv(args: &[&str]) -> String {
    let (_, table) = run_args(std::iter::once("markov-matern").chain(args.iter().copied())).unwrap();
    table.to_csv_string()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_markov-matern"))
}

#[test]
fn coefficient_signs() {
    for beta in ["0.1", "0.5", "0.9"] {
        let out = csv(&["coeffs", "--beta", beta, "--m", "4"]);
        let rows = rows(&out);
        assert_eq!(rows.len(), 5);
        let mut last_pole = 0.0;
        for r in &rows[1..] {
            let c: f64 = r[5].parse().unwrap();
            let p: f64 = r[6].parse().unwrap();
            let k: f64 = r[7].parse().unwrap();
            assert!(c > 0.0 && p < 0.0 && k > 0.0, "beta {beta}: {r:?}");
            assert!(p < last_pole);
            last_pole = p;
        }
    }
}

#[test]
fn constant_order() {
    let out = csv(&["coeffs", "--beta", "0.5", "--m", "0"]);
    assert_eq!(out, "beta,m,i,a_i,b_i,c_i,p_i,k,sup_error\n0.5,0,0,0.5,1.0,,,0.5,0.5\n");
}

#[test]
fn output_is_byte_stable() {
    let args = ["coeffs", "--beta", "0.5", "--m", "3", "--m-max", "6"];
    assert_eq!(csv(&args), csv(&args));
    let args = ["sample", "--nu", "1.3", "--n", "50", "--seed", "9"];
    assert_eq!(csv(&args), csv(&args));
    assert_ne!(csv(&args), csv(&["sample", "--nu", "1.3", "--n", "50", "--seed", "10"]));
}

#[test]
fn exit_codes() {
    let ok = bin().args(["coeffs", "--beta", "0.5", "--m", "2"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8(ok.stdout).unwrap().starts_with("beta,m,i"));
    let bad = bin().args(["cov", "--rho", "1", "--kappa", "1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(String::from_utf8(bad.stderr).unwrap().lines().count(), 1);
    let bad = bin().args(["cov-error", "--nu", "1.5"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let bad = bin().args(["coeffs", "--beta", "1.5"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    // σ_e this small makes the posterior precision overflow
    let fail = bin().args(["predict", "--nu", "1", "--n", "20", "--m", "2", "--sigma-e", "1e-300"]).output().unwrap();
    assert_eq!(fail.status.code(), Some(3), "{}", String::from_utf8_lossy(&fail.stderr));
}

#[test]
fn writes_to_file() {
    let dir = std::env::temp_dir().join(format!("mm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cov.csv");
    let status = bin().args(["cov", "--nu", "0.7", "--m", "2", "--n", "5", "--out"]).arg(&path).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("nu,m,h,cov_true,cov_approx\n"));
    assert_eq!(text.lines().count(), 6);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn cov_error_rows() {
    let out = csv(&["cov-error", "--nu", "0.5,1.4", "--m", "2", "--m-max", "4", "--n", "400", "--exact"]);
    let rows = rows(&out);
    assert_eq!(rows.len(), 6);
    for r in &rows {
        let nu: f64 = r[0].parse().unwrap();
        let l2: f64 = r[2].parse().unwrap();
        let sup: f64 = r[3].parse().unwrap();
        let bound: f64 = r[4].parse().unwrap();
        if nu == 0.5 {
            assert!(sup < 1e-10 && l2 < 1e-10);
        } else {
            assert!(l2 <= 2.0 * bound);
        }
    }
}

#[test]
fn kl_exact_model_is_zero() {
    let rows = studies::kl_scenario(0.5, &[1.0], &[2], &[0], KlMode::Posterior, 1.0, 0.1, 3).unwrap();
    assert!(rows[0].kl < 1e-10, "{}", rows[0].kl);
    let rows = studies::kl_scenario(1.5, &[1.0], &[2], &[0], KlMode::Prior, 1.0, 0.1, 3).unwrap();
    assert!(rows[0].kl < 1e-10, "{}", rows[0].kl);
}

#[test]
fn kl_csv_has_scale_comment() {
    let out = csv(&["kl", "--mode", "prior", "--rho", "1", "--m", "3", "--n-pred", "3"]);
    let first = out.lines().next().unwrap();
    assert!(first.starts_with("# desk scale: 251"));
    assert_eq!(rows(&out).len(), 4);
}

#[test]
fn sample_variance_and_derivative_variance() {
    let p = MaternParams::from_range(2.4, 2.0, 1.0).unwrap();
    let comps = components(&p, 3).unwrap();
    let v0 = total_cov(&comps, 0.0);
    let v1: f64 = -comps.iter().map(|c| c.deriv(2, 0.0).unwrap()).sum::<f64>();
    let model = build_joint(&p, 3, &[24.0, 25.0, 26.0]).unwrap();
    let draws = 100_000;
    let (mut s0, mut s1) = (0.0, 0.0);
    for seed in 0..draws {
        let d = sample_derivatives(&model, seed, 1).unwrap();
        s0 += d[0][1] * d[0][1];
        s1 += d[1][1] * d[1][1];
    }
    let n = draws as f64;
    let se = |v: f64| v * (2.0 / n).sqrt();
    assert!((s0 / n - v0).abs() < 3.0 * se(v0), "{} vs {v0}", s0 / n);
    assert!((s1 / n - v1).abs() < 3.0 * se(v1), "{} vs {v1}", s1 / n);
}

#[test]
fn sample_csv_columns() {
    let out = csv(&["sample", "--nu", "2.4", "--m", "2", "--n", "4", "--derivatives", "1"]);
    assert!(out.starts_with("t,u,u_d1\n"));
    assert_eq!(rows(&out).len(), 4);
}
