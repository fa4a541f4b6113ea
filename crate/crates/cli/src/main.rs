//! `momentlock` command-line front end.

mod config;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use momentlock::diagnostics::{chebyshev_fit, fit_upper_half, study_cell, ConvergenceRow, TestFunction};
use momentlock::grid::{default_grid, initial_discretization, QuadratureRule, RuleKind};
use momentlock::maxent::{kl_divergence, solve_dual, total_variation_l1};
use momentlock::moments::{targets_from_density, MomentDefiningFunction};
use momentlock::portfolio::{discretize_stock_return, optimize_theta, PortfolioProblem, REFERENCE_THETA};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde_json::{json, Value};

use config::{pick, pick_list, thread_pool, DensitySpec, FileConfig, SolverFlags};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] momentlock::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{violations} of {pairs} pairs violate Pinsker's inequality")]
    PinskerViolation { violations: usize, pairs: usize },
}

impl CliError {
    fn kind_name(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Core(e) => e.kind_name(),
            CliError::Io(_) => "IoError",
            CliError::PinskerViolation { .. } => "PinskerViolation",
        }
    }

    fn exit_code(&self) -> u8 {
        use momentlock::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(e) if e.is_infeasibility() => 3,
            CliError::Core(E::NoConvergence { .. }) => 5,
            CliError::Core(
                E::InvalidParams(_)
                | E::Unsupported(_)
                | E::NonUniformGrid { .. }
                | E::EvenPointCount(_)
                | E::InvalidGrid(_)
                | E::NegativeWeight { .. }
                | E::DimensionMismatch { .. }
                | E::NonFiniteValue { .. }
                | E::DegenerateDiscretization,
            ) => 2,
            CliError::Core(_) | CliError::PinskerViolation { .. } => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "momentlock", version, about = "Moment-exact discretization of continuous densities")]
struct Cli {
    /// TOML file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one discretization and print it as JSON.
    Discretize {
        /// beta:a,b | uniform[:lo,hi] | std_normal
        #[arg(long)]
        density: Option<String>,
        #[arg(long)]
        rule: Option<String>,
        /// Grid refinement index.
        #[arg(long = "M")]
        m: Option<usize>,
        /// Number of polynomial moments matched.
        #[arg(long = "L")]
        l: Option<usize>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Errors of Q and P for one integrand over a sweep of M and L, as CSV.
    Convergence {
        #[arg(long)]
        density: Option<String>,
        #[arg(long)]
        rule: Option<String>,
        /// exp_x | x_9_2 | inv_1px | sin_pi_x | log_1px
        #[arg(long)]
        g: Option<String>,
        /// Moment orders, e.g. `2,4,6`.
        #[arg(long = "L")]
        l: Option<String>,
        /// Refinement indices, e.g. `1..12` or `4,8`.
        #[arg(long = "M")]
        m: Option<String>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Chebyshev interpolation residuals on [0, 1], as CSV.
    Chebyshev {
        /// Interpolation degrees, e.g. `2,4,6`.
        #[arg(long)]
        degrees: Option<String>,
        /// Restrict to one integrand.
        #[arg(long)]
        g: Option<String>,
    },
    /// Optimal CRRA portfolio share over a sweep of M and L, as CSV.
    Portfolio {
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long = "M")]
        m: Option<String>,
        #[arg(long = "L")]
        l: Option<String>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Checks Pinsker's inequality on random distribution pairs.
    PinskerCheck {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        pairs: Option<usize>,
    },
}

/// 17 significant digits.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

fn json_num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(serde_json::Number::from_str(&fmt17(x)).expect("formatted float is valid JSON"))
    } else {
        Value::Null
    }
}

fn json_vec(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| json_num(x)).collect())
}

fn discretize(
    file: &FileConfig,
    density: Option<String>,
    rule: Option<String>,
    m: Option<usize>,
    l: Option<usize>,
    solver: &SolverFlags,
) -> Result<String, CliError> {
    let density = pick(density, file.density.as_deref(), "beta:1,3".into(), "density")?;
    let density: DensitySpec = density.parse().map_err(CliError::Config)?;
    let rule: RuleKind = pick(rule.map(|r| r.parse()).transpose()?, file.rule.as_deref(), RuleKind::Trapezoid, "rule")?;
    let m = m.or(file.m.as_ref().map(|v| single(v, "M")).transpose()?).unwrap_or(4);
    let l = l.or(file.l.as_ref().map(|v| single(v, "L")).transpose()?).unwrap_or(2);
    let cfg = solver.resolve(file)?;

    let f = density.build()?;
    let set = default_grid(&f, m)?;
    let q = initial_discretization(&f, &set, &QuadratureRule::build(rule, &set)?)?;
    let t = MomentDefiningFunction::polynomial(l)?;
    let targets = targets_from_density(&f, &t)?;
    let sol = solve_dual(&q, &t, &targets, &cfg)?;
    let doc = json!({
        "points": json_vec(set.points()),
        "q": json_vec(q.probs()),
        "p": json_vec(&sol.probs),
        "lambda": json_vec(&sol.dual.lambda),
        "kl": json_num(sol.kl),
        "residual": json_num(sol.moment_residual),
        "iterations": sol.dual.iterations,
    });
    Ok(serde_json::to_string_pretty(&doc).expect("JSON value serializes") + "\n")
}

fn single(v: &config::ListValue, what: &str) -> Result<usize, CliError> {
    match v.resolve()?.as_slice() {
        [x] => Ok(*x),
        _ => Err(CliError::Config(format!("{what} must be a single value here"))),
    }
}

fn convergence(
    file: &FileConfig,
    density: Option<String>,
    rule: Option<String>,
    g: Option<String>,
    l: Option<String>,
    m: Option<String>,
    solver: &SolverFlags,
) -> Result<String, CliError> {
    let density = pick(density, file.density.as_deref(), "beta:1,3".into(), "density")?;
    let density: DensitySpec = density.parse().map_err(CliError::Config)?;
    let rule: RuleKind = pick(rule.map(|r| r.parse()).transpose()?, file.rule.as_deref(), RuleKind::Trapezoid, "rule")?;
    let g: TestFunction = pick(g.map(|r| r.parse()).transpose()?, file.g.as_deref(), TestFunction::ExpX, "g")?;
    let ls = pick_list(l.as_deref(), file.l.as_ref(), &[2, 4, 6], "L")?;
    let ms = pick_list(m.as_deref(), file.m.as_ref(), &(1..=12).collect::<Vec<_>>(), "M")?;
    let cfg = solver.resolve(file)?;
    let f = density.build()?;

    let cells: Vec<(usize, usize)> = ls.iter().flat_map(|&l| ms.iter().map(move |&m| (l, m))).collect();
    let rows: Vec<ConvergenceRow<f64>> = thread_pool()?.install(|| {
        cells
            .par_iter()
            .map(|&(l, m)| study_cell(&f, |x| g.eval(x), rule, l, m, &cfg))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut out = String::from("L,M,I_M,e_q,e_p,rel_e_q,rel_e_p,kl,pinsker_bound,moment_residual,status\n");
    for (&(l, _), row) in cells.iter().zip(&rows) {
        let rel = |e: f64| e / row.exact.abs();
        let status = match (row.failure, row.sparse_warning) {
            (Some(name), _) => name,
            (None, true) => "sparse",
            (None, false) => "ok",
        };
        writeln!(
            out,
            "{l},{},{},{},{},{},{},{},{},{},{status}",
            row.m,
            row.points,
            fmt17(row.e_q),
            fmt_opt(row.e_p),
            fmt17(rel(row.e_q)),
            fmt_opt(row.e_p.map(rel)),
            fmt_opt(row.kl),
            fmt_opt(row.pinsker_bound),
            fmt_opt(row.moment_residual),
        )
        .expect("writing to a String cannot fail");
    }
    for &l in &ls {
        let mut per_l: Vec<ConvergenceRow<f64>> =
            cells.iter().zip(&rows).filter(|((cl, _), _)| *cl == l).map(|(_, r)| r.clone()).collect();
        per_l.sort_by_key(|r| r.m);
        let (sq, sp) = fit_upper_half(&per_l);
        eprintln!("L={l}: slope e_q {}, slope e_p {}", fmt_opt(sq), fmt_opt(sp));
    }
    Ok(out)
}

fn chebyshev(file: &FileConfig, degrees: Option<String>, g: Option<String>) -> Result<String, CliError> {
    let degrees = pick_list(degrees.as_deref(), file.degrees.as_ref(), &[2, 4, 6], "degrees")?;
    let funcs: Vec<TestFunction> = match g.or_else(|| file.g.clone()) {
        Some(name) => vec![name.parse()?],
        None => TestFunction::ALL.to_vec(),
    };
    let mut out = String::from("g,degree,sup_residual,log10_residual\n");
    for &degree in &degrees {
        for &g in &funcs {
            let fit = chebyshev_fit(|x: f64| g.eval(x), 0.0, 1.0, degree)?;
            writeln!(out, "{},{degree},{},{}", g.name(), fmt17(fit.sup_residual), fmt17(fit.log10_residual()))
                .expect("writing to a String cannot fail");
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn portfolio(
    file: &FileConfig,
    gamma: Option<f64>,
    mu: Option<f64>,
    sigma: Option<f64>,
    r: Option<f64>,
    m: Option<String>,
    l: Option<String>,
    solver: &SolverFlags,
) -> Result<String, CliError> {
    let base = PortfolioProblem::<f64>::reference(1, 0);
    let gamma = gamma.or(file.gamma).unwrap_or(base.gamma);
    let mu = mu.or(file.mu).unwrap_or(base.mu);
    let sigma = sigma.or(file.sigma).unwrap_or(base.sigma);
    let r = r.or(file.r).unwrap_or(base.r);
    let ms = pick_list(m.as_deref(), file.m.as_ref(), &[1, 4, 9, 16, 25], "M")?;
    let ls = pick_list(l.as_deref(), file.l.as_ref(), &[0, 2, 4], "L")?;
    let cfg = solver.resolve(file)?;
    // Reject bad economic parameters before the sweep.
    PortfolioProblem::new(gamma, mu, sigma, r, ms[0], ls[0])?;

    let cells: Vec<(usize, usize)> = ms.iter().flat_map(|&m| ls.iter().map(move |&l| (m, l))).collect();
    let results: Vec<Result<(usize, f64), momentlock::Error>> = thread_pool()?.install(|| {
        cells
            .par_iter()
            .map(|&(m, l)| {
                let p = PortfolioProblem::new(gamma, mu, sigma, r, m, l)?;
                let dist = discretize_stock_return(&p, &cfg)?;
                let theta = optimize_theta(&dist.atoms, &dist.probs, &p)?;
                Ok((dist.grid.len(), theta))
            })
            .collect()
    });

    let mut out = String::from("M,I_M,L,theta,rel_error_percent,status\n");
    for (&(m, l), res) in cells.iter().zip(results) {
        let line = match res {
            Ok((points, theta)) => {
                let rel = 100.0 * (theta - REFERENCE_THETA) / REFERENCE_THETA;
                format!("{m},{points},{l},{},{},ok", fmt17(theta), fmt17(rel))
            }
            Err(e @ momentlock::Error::NoConvergence { .. }) => return Err(e.into()),
            Err(e) => format!("{m},{},{l},,,{}", 2 * m + 1, e.kind_name()),
        };
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

fn random_simplex(rng: &mut StdRng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(1e-6..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

fn pinsker_check(file: &FileConfig, seed: Option<u64>, pairs: Option<usize>) -> Result<String, CliError> {
    let seed = seed.or(file.seed).unwrap_or(0);
    let pairs = pairs.or(file.pairs).unwrap_or(1000);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    for _ in 0..pairs {
        let n = rng.gen_range(2..=20);
        let (p, q) = (random_simplex(&mut rng, n), random_simplex(&mut rng, n));
        let kl = kl_divergence(&p, &q)?;
        let l1 = total_variation_l1(&p, &q);
        let bound = (2.0 * kl).sqrt();
        min_slack = min_slack.min(bound - l1);
        if bound > 0.0 {
            max_ratio = max_ratio.max(l1 / bound);
        }
        if l1 > bound {
            violations += 1;
        }
    }
    let doc = json!({
        "seed": seed,
        "pairs": pairs,
        "violations": violations,
        "min_slack": json_num(min_slack),
        "max_ratio": json_num(max_ratio),
    });
    if violations > 0 {
        return Err(CliError::PinskerViolation { violations, pairs });
    }
    Ok(serde_json::to_string_pretty(&doc).expect("JSON value serializes") + "\n")
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let text = match cli.command {
        Command::Discretize { density, rule, m, l, solver } => discretize(&file, density, rule, m, l, &solver)?,
        Command::Convergence { density, rule, g, l, m, solver } => convergence(&file, density, rule, g, l, m, &solver)?,
        Command::Chebyshev { degrees, g } => chebyshev(&file, degrees, g)?,
        Command::Portfolio { gamma, mu, sigma, r, m, l, solver } => portfolio(&file, gamma, mu, sigma, r, m, l, &solver)?,
        Command::PinskerCheck { seed, pairs } => pinsker_check(&file, seed, pairs)?,
    };
    match cli.out.or_else(|| file.out.as_ref().map(PathBuf::from)) {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind_name());
            ExitCode::from(e.exit_code())
        }
    }
}
