//! Command-line flags and their validation into a [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use markov_matern::kernels::MaternParams;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(markov_matern::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<markov_matern::Error> for CliError {
    fn from(e: markov_matern::Error) -> Self {
        use markov_matern::Error as E;
        match e {
            E::InvalidArgument(msg) => CliError::Config(msg),
            E::Dimension { .. } | E::NotSmooth { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "markov-matern", version, about = "Markov approximations of Matérn processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Rational and partial-fraction coefficients of the best approximation of x^β
    Coeffs,
    /// True and approximate spectral densities on a frequency grid
    Spectrum,
    /// True and approximate covariance on a lag grid
    Cov,
    /// Covariance errors over a grid of ν and m
    CovError,
    /// Posterior mean and sd errors against exact dense regression
    Predict,
    /// KL divergences in the desk-scale forecasting scenario
    Kl,
    /// One sample path, optionally with derivatives
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Prior,
    Posterior,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Smoothness ν: a value, a comma list, or start:stop:step
    #[arg(long, global = true)]
    pub nu: Option<String>,
    /// Exponent β of x^β for `coeffs` (list allowed); defaults to the fractional part of ν + ½
    #[arg(long, global = true)]
    pub beta: Option<String>,
    /// Practical correlation range ρ = √(8ν)/κ (list allowed for `kl`)
    #[arg(long, global = true)]
    pub rho: Option<String>,
    /// Inverse range κ; excludes --rho
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    /// Marginal standard deviation σ
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Noise standard deviation; list allowed, entries may be written sqrt(x)
    #[arg(long, global = true)]
    pub sigma_e: Option<String>,
    /// Order m, or the first order of a range ending at --m-max
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true)]
    pub m_max: Option<usize>,
    /// Interval a,b
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub interval: Option<String>,
    /// Number of grid points
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Largest number of forecast points for `kl`
    #[arg(long, global = true)]
    pub n_pred: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Add numerical-oracle columns where available
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Allow integer α = ν + ½ in grids, where the model is exact
    #[arg(long, global = true)]
    pub exact: bool,
    /// Prior or posterior distributions for `kl`
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    /// Highest derivative order emitted by `sample`
    #[arg(long, global = true)]
    pub derivatives: Option<usize>,
}

/// Range specification: one of ρ or κ.
#[derive(Debug, Clone, PartialEq)]
pub enum Scale {
    Rho(Vec<f64>),
    Kappa(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub nus: Vec<f64>,
    pub betas: Vec<f64>,
    pub scale: Scale,
    pub sigma: f64,
    pub sigma_es: Vec<f64>,
    pub ms: Vec<usize>,
    pub interval: (f64, f64),
    pub n: usize,
    pub n_pred: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub oracle: bool,
    pub exact: bool,
    pub mode: Mode,
    pub derivatives: usize,
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_number(s: &str) -> CliResult<f64> {
    let s = s.trim();
    let v = if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
        parse_number(inner)?.sqrt()
    } else {
        s.parse::<f64>().map_err(|_| config(format!("not a number: {s:?}")))?
    };
    if !v.is_finite() {
        return Err(config(format!("not finite: {s:?}")));
    }
    Ok(v)
}

/// "x", "x,y,z" or "start:stop:step" (inclusive, tolerant to rounding).
pub fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (a, b, h) = (parse_number(parts[0])?, parse_number(parts[1])?, parse_number(parts[2])?);
        if !(h > 0.0) || b < a {
            return Err(config(format!("bad range {s:?}")));
        }
        let count = ((b - a) / h + 1e-9).floor() as usize;
        // rounded to 12 digits so that 0.1 + 0.1·k lands on the decimal grid
        return Ok((0..=count).map(|k| ((a + k as f64 * h) * 1e12).round() / 1e12).collect());
    }
    if parts.len() != 1 {
        return Err(config(format!("bad list {s:?}")));
    }
    s.split(',').map(parse_number).collect()
}

pub fn parse_interval(s: &str) -> CliResult<(f64, f64)> {
    let v = s.split(',').map(parse_number).collect::<CliResult<Vec<_>>>()?;
    match v[..] {
        [a, b] if a < b => Ok((a, b)),
        _ => Err(config(format!("interval must be a,b with a < b, got {s:?}"))),
    }
}

struct Defaults {
    nu: &'static str,
    m: (usize, usize),
    n: usize,
    rho: &'static str,
    sigma_e: &'static str,
}

fn defaults(c: Command) -> Defaults {
    let base = Defaults { nu: "1.0", m: (4, 4), n: 1000, rho: "2", sigma_e: "0.1" };
    match c {
        Command::Coeffs => Defaults { nu: "0.5", ..base },
        Command::Spectrum | Command::Cov => Defaults { n: 201, ..base },
        Command::CovError => Defaults { nu: "0.1:2.4:0.1", m: (2, 6), n: 2000, ..base },
        Command::Predict => Defaults { m: (2, 6), ..base },
        Command::Kl => Defaults { m: (3, 6), rho: "0.5,1,2", ..base },
        Command::Sample => Defaults { n: 500, ..base },
    }
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> CliResult<Self> {
        let f = &cli.flags;
        let d = defaults(cli.command);
        let nus = parse_list(f.nu.as_deref().unwrap_or(d.nu))?;
        if nus.iter().any(|&nu| !(nu > 0.0)) {
            return Err(config("nu must be positive"));
        }
        let betas = match &f.beta {
            Some(b) => parse_list(b)?,
            None => nus.iter().map(|nu| (nu + 0.5).fract()).collect(),
        };
        let scale = match (&f.rho, f.kappa) {
            (Some(_), Some(_)) => return Err(config("give at most one of --rho and --kappa")),
            (None, Some(k)) if k > 0.0 && k.is_finite() => Scale::Kappa(k),
            (None, Some(k)) => return Err(config(format!("kappa must be positive, got {k}"))),
            (rho, None) => {
                let r = parse_list(rho.as_deref().unwrap_or(d.rho))?;
                if r.iter().any(|&r| !(r > 0.0)) {
                    return Err(config("rho must be positive"));
                }
                Scale::Rho(r)
            }
        };
        let sigma = f.sigma.unwrap_or(1.0);
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(config("sigma must be positive"));
        }
        let sigma_es = parse_list(f.sigma_e.as_deref().unwrap_or(d.sigma_e))?;
        if sigma_es.iter().any(|&s| !(s > 0.0)) {
            return Err(config("sigma-e must be positive"));
        }
        let m0 = f.m.unwrap_or(d.m.0);
        let m1 = f.m_max.unwrap_or(if f.m.is_some() { m0 } else { d.m.1 });
        if m1 < m0 {
            return Err(config(format!("--m-max {m1} is below --m {m0}")));
        }
        let interval = match &f.interval {
            Some(s) => parse_interval(s)?,
            None => (0.0, 50.0),
        };
        let n = f.n.unwrap_or(d.n);
        if n == 0 {
            return Err(config("n must be positive"));
        }
        let cfg = RunConfig {
            command: cli.command,
            nus,
            betas,
            scale,
            sigma,
            sigma_es,
            ms: (m0..=m1).collect(),
            interval,
            n,
            n_pred: f.n_pred.unwrap_or(crate::studies::KL_MAX_EXTRA),
            seed: f.seed.unwrap_or(1),
            out: f.out.clone(),
            oracle: f.oracle,
            exact: f.exact,
            mode: f.mode.unwrap_or(Mode::Posterior),
            derivatives: f.derivatives.unwrap_or(0),
        };
        cfg.check_integer_alpha()?;
        Ok(cfg)
    }

    /// Grids of ν must avoid integer α unless --exact is given.
    fn check_integer_alpha(&self) -> CliResult<()> {
        if self.exact || !matches!(self.command, Command::CovError | Command::Predict | Command::Kl) {
            return Ok(());
        }
        if let Some(nu) = self.nus.iter().find(|&&nu| MaternParams::new(nu + 0.5, 1.0, 1.0).is_ok_and(|p| p.is_integer())) {
            return Err(config(format!("nu = {nu} gives integer alpha; pass --exact to include it")));
        }
        Ok(())
    }

    /// Range values ρ to iterate over; κ mode yields the single ρ implied for `nu`.
    pub fn rhos(&self, nu: f64) -> Vec<f64> {
        match &self.scale {
            Scale::Rho(r) => r.clone(),
            Scale::Kappa(k) => vec![(8.0 * nu).sqrt() / k],
        }
    }

    /// Parameters for ν with the first configured range.
    pub fn params(&self, nu: f64) -> CliResult<MaternParams> {
        Ok(match &self.scale {
            Scale::Rho(r) => MaternParams::from_range(nu, r[0], self.sigma)?,
            Scale::Kappa(k) => MaternParams::new(nu + 0.5, *k, self.sigma * self.sigma)?,
        })
    }
}
