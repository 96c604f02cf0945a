//! Subcommand dispatch: turns a [`RunConfig`] into a CSV [`Table`].

use crate::config::{CliResult, Command, Mode, RunConfig};
use crate::output::{num, Table};
use crate::studies::{self, linspace, KlMode, KL_OBSERVATIONS, KL_SPACING};

pub fn run(cfg: &RunConfig) -> CliResult<Table> {
    match cfg.command {
        Command::Coeffs => coeffs(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Cov => cov(cfg),
        Command::CovError => cov_error(cfg),
        Command::Predict => predict(cfg),
        Command::Kl => kl(cfg),
        Command::Sample => sample(cfg),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn coeffs(cfg: &RunConfig) -> CliResult<Table> {
    let mut t = Table::new(&["beta", "m", "i", "a_i", "b_i", "c_i", "p_i", "k", "sup_error"]);
    for &beta in &cfg.betas {
        for &m in &cfg.ms {
            for r in studies::coeffs(beta, m)? {
                t.push(vec![
                    num(r.beta),
                    r.m.to_string(),
                    r.i.to_string(),
                    num(r.a),
                    num(r.b),
                    opt(r.c),
                    opt(r.p),
                    num(r.k),
                    num(r.sup_error),
                ]);
            }
        }
    }
    Ok(t)
}

fn first_nu(cfg: &RunConfig) -> f64 {
    cfg.nus[0]
}

fn spectrum(cfg: &RunConfig) -> CliResult<Table> {
    let params = cfg.params(first_nu(cfg))?;
    let mut t = Table::new(&["nu", "m", "w", "f_true", "f_approx"]);
    let ws = linspace(cfg.interval.0, cfg.interval.1, cfg.n);
    for &m in &cfg.ms {
        for [w, f, fm] in studies::spectrum(&params, m, &ws)? {
            t.push(vec![num(params.nu()), m.to_string(), num(w), num(f), num(fm)]);
        }
    }
    Ok(t)
}

fn cov(cfg: &RunConfig) -> CliResult<Table> {
    let params = cfg.params(first_nu(cfg))?;
    let mut header = vec!["nu", "m", "h", "cov_true", "cov_approx"];
    if cfg.oracle {
        header.push("cov_quadrature");
    }
    let mut t = Table::new(&header);
    let hs = linspace(cfg.interval.0, cfg.interval.1, cfg.n);
    for &m in &cfg.ms {
        for row in studies::cov_table(&params, m, &hs, cfg.oracle)? {
            let mut out = vec![num(params.nu()), m.to_string()];
            out.extend(row.into_iter().map(num));
            t.push(out);
        }
    }
    Ok(t)
}

fn cov_error(cfg: &RunConfig) -> CliResult<Table> {
    let mut t = Table::new(&["nu", "m", "l2_error", "sup_error", "theory_bound"]);
    for &nu in &cfg.nus {
        for rho in cfg.rhos(nu) {
            for r in studies::cov_error(&[nu], &cfg.ms, cfg.n, rho, cfg.sigma, cfg.interval)? {
                t.push(vec![num(r.nu), r.m.to_string(), num(r.l2_error), num(r.sup_error), num(r.theory_bound)]);
            }
        }
    }
    Ok(t)
}

fn predict(cfg: &RunConfig) -> CliResult<Table> {
    let mut t = Table::new(&["nu", "sigma_e", "m", "mean_l2_error", "sd_l2_error"]);
    for &nu in &cfg.nus {
        let rho = cfg.rhos(nu)[0];
        let rows = studies::predict_errors(&[nu], &cfg.ms, cfg.n, rho, cfg.sigma, &cfg.sigma_es, cfg.interval, cfg.seed)?;
        for r in rows {
            t.push(vec![num(r.nu), num(r.sigma_e), r.m.to_string(), num(r.mean_l2_error), num(r.sd_l2_error)]);
        }
    }
    Ok(t)
}

fn kl(cfg: &RunConfig) -> CliResult<Table> {
    let nu = first_nu(cfg);
    let extras: Vec<usize> = studies::kl_default_extras().into_iter().filter(|&e| e < cfg.n_pred).chain([cfg.n_pred]).collect();
    if KL_OBSERVATIONS + cfg.n_pred > 3000 {
        return Err(crate::config::CliError::Config("total dimension above 3000; lower --n-pred".into()));
    }
    let mode = match cfg.mode {
        Mode::Prior => KlMode::Prior,
        Mode::Posterior => KlMode::Posterior,
    };
    let mut t = Table::new(&["rho", "n_pred_extra", "m", "kl"]);
    t.comments.push(format!(
        "desk scale: {KL_OBSERVATIONS} observation points on [0,10] with mesh spacing {KL_SPACING} (full scale 1001 points, spacing 0.01); \
         forecast points continue the mesh; mode {}; KL(true || approximate)",
        if mode == KlMode::Prior { "prior" } else { "posterior" }
    ));
    let rhos = cfg.rhos(nu);
    let rows = studies::kl_scenario(nu, &rhos, &cfg.ms, &extras, mode, cfg.sigma, cfg.sigma_es[0], cfg.seed)?;
    for r in rows {
        t.push(vec![num(r.rho), r.n_pred_extra.to_string(), r.m.to_string(), num(r.kl)]);
    }
    Ok(t)
}

fn sample(cfg: &RunConfig) -> CliResult<Table> {
    let params = cfg.params(first_nu(cfg))?;
    let mut header = vec!["t".to_string(), "u".to_string()];
    header.extend((1..=cfg.derivatives).map(|d| format!("u_d{d}")));
    let mut t = Table { header, ..Default::default() };
    let ts = linspace(cfg.interval.0, cfg.interval.1, cfg.n);
    let draws = studies::sample_path(&params, cfg.ms[0], &ts, cfg.seed, cfg.derivatives)?;
    for (j, &tj) in ts.iter().enumerate() {
        let mut row = vec![num(tj)];
        row.extend(draws.iter().map(|d| num(d[j])));
        t.push(row);
    }
    Ok(t)
}
