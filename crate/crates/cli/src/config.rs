//! Flag and config-file parsing. Explicit flags win over the config file, which wins
//! over built-in defaults.

use std::path::Path;
use std::str::FromStr;

use momentlock::{Density64, SolverConfig64};
use serde::Deserialize;

use crate::CliError;

/// Density named on the command line: `beta:a,b`, `uniform`, `uniform:lo,hi` or `std_normal`.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    Beta(f64, f64),
    Uniform(f64, f64),
    StdNormal,
}

impl DensitySpec {
    pub fn build(&self) -> Result<Density64, CliError> {
        Ok(match *self {
            DensitySpec::Beta(a, b) => Density64::beta(a, b)?,
            DensitySpec::Uniform(lo, hi) => Density64::uniform(lo, hi)?,
            DensitySpec::StdNormal => Density64::std_normal(),
        })
    }
}

fn two_params(name: &str, params: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = params.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("{name} expects two parameters, got '{params}'"));
    }
    let parse = |s: &str| s.parse::<f64>().map_err(|_| format!("bad {name} parameter '{s}'"));
    Ok((parse(parts[0])?, parse(parts[1])?))
}

impl FromStr for DensitySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p)),
            None => (s.trim(), None),
        };
        match (name, params) {
            ("beta", Some(p)) => two_params("beta", p).map(|(a, b)| DensitySpec::Beta(a, b)),
            ("uniform", None) => Ok(DensitySpec::Uniform(0.0, 1.0)),
            ("uniform", Some(p)) => two_params("uniform", p).map(|(a, b)| DensitySpec::Uniform(a, b)),
            ("std_normal" | "normal", None) => Ok(DensitySpec::StdNormal),
            _ => Err(format!("unknown density '{s}' (expected beta:a,b, uniform[:lo,hi] or std_normal)")),
        }
    }
}

/// Parses `6..12` (inclusive), `1,4,9` or a single integer.
pub fn parse_index_list(s: &str) -> Result<Vec<usize>, String> {
    let s = s.trim();
    let int = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad integer '{t}' in '{s}'"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (int(a)?, int(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty range '{s}'"));
        }
        return Ok((a..=b).collect());
    }
    let values = s.split(',').map(int).collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("empty list".into());
    }
    Ok(values)
}

/// A list given in a config file either as a string (`"1..12"`), one integer or an array.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ListValue {
    Int(usize),
    List(Vec<usize>),
    Text(String),
}

impl ListValue {
    pub fn resolve(&self) -> Result<Vec<usize>, CliError> {
        match self {
            ListValue::Int(v) => Ok(vec![*v]),
            ListValue::List(v) if !v.is_empty() => Ok(v.clone()),
            ListValue::List(_) => Err(CliError::Config("empty list in config file".into())),
            ListValue::Text(s) => parse_index_list(s).map_err(CliError::Config),
        }
    }
}

/// Contents of a `--config` TOML file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub density: Option<String>,
    pub rule: Option<String>,
    pub g: Option<String>,
    #[serde(rename = "L")]
    pub l: Option<ListValue>,
    #[serde(rename = "M")]
    pub m: Option<ListValue>,
    pub degrees: Option<ListValue>,
    pub kappa: Option<f64>,
    pub stop_tol: Option<f64>,
    pub grad_tol: Option<f64>,
    pub residual_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub gamma: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub r: Option<f64>,
    pub seed: Option<u64>,
    pub pairs: Option<usize>,
    pub out: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

/// Solver knobs shared by every subcommand.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct SolverFlags {
    /// Newton regularization κ.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Stop when the Newton step norm falls below this.
    #[arg(long)]
    pub stop_tol: Option<f64>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    /// Largest accepted moment residual.
    #[arg(long)]
    pub residual_tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

impl SolverFlags {
    pub fn resolve(&self, file: &FileConfig) -> Result<SolverConfig64, CliError> {
        let mut cfg = SolverConfig64::default();
        if let Some(v) = self.kappa.or(file.kappa) {
            cfg.kappa = v;
        }
        if let Some(v) = self.stop_tol.or(file.stop_tol) {
            cfg.stop_tol = v;
        }
        if let Some(v) = self.grad_tol.or(file.grad_tol) {
            cfg.grad_tol = v;
        }
        if let Some(v) = self.residual_tol.or(file.residual_tol) {
            cfg.residual_tol = v;
        }
        if let Some(v) = self.max_iters.or(file.max_iters) {
            cfg.max_iters = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Picks the flag, then the config value, then the default, parsing strings as needed.
pub fn pick<T: FromStr>(flag: Option<T>, file: Option<&str>, default: T, what: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    match file {
        Some(s) => s.parse().map_err(|e| CliError::Config(format!("{what}: {e}"))),
        None => Ok(default),
    }
}

pub fn pick_list(flag: Option<&str>, file: Option<&ListValue>, default: &[usize], what: &str) -> Result<Vec<usize>, CliError> {
    match (flag, file) {
        (Some(s), _) => parse_index_list(s).map_err(|e| CliError::Config(format!("{what}: {e}"))),
        (None, Some(v)) => v.resolve(),
        (None, None) => Ok(default.to_vec()),
    }
}

/// Parallelism cap from `MOMENTLOCK_THREADS`; unset means rayon's default.
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("MOMENTLOCK_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Config(format!("MOMENTLOCK_THREADS must be a positive integer, got '{v}'")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))
}
