//! Error measurement for discretizations: expectation errors under `Q` and `P`, the
//! Pinsker-based bound that links them, Chebyshev residuals and empirical convergence
//! orders.

use std::str::FromStr;

use crate::density::Density;
use crate::error::{Error, Result};
use crate::grid::{default_grid, initial_discretization, InitialDiscretization, QuadratureRule, RuleKind};
use crate::maxent::{solve_dual, MaxEntSolution, SolverConfig};
use crate::moments::{targets_from_density, MomentDefiningFunction, MomentTargets};
use crate::scalar::{norm2, ordered_sum, Scalar};

/// Sample count for sup-norm estimates.
pub const SUP_NORM_SAMPLES: usize = 100_000;

/// The built-in integrands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestFunction {
    /// `e^x`
    ExpX,
    /// `x^(9/2)`
    X92,
    /// `1/(1+x)`
    Inv1px,
    /// `sin(πx)`
    SinPiX,
    /// `log(1+x)`
    Log1px,
}

impl TestFunction {
    pub const ALL: [TestFunction; 5] =
        [TestFunction::ExpX, TestFunction::X92, TestFunction::Inv1px, TestFunction::SinPiX, TestFunction::Log1px];

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::ExpX => "exp_x",
            TestFunction::X92 => "x_9_2",
            TestFunction::Inv1px => "inv_1px",
            TestFunction::SinPiX => "sin_pi_x",
            TestFunction::Log1px => "log_1px",
        }
    }

    pub fn eval<S: Scalar>(self, x: S) -> S {
        match self {
            TestFunction::ExpX => x.exp(),
            TestFunction::X92 => x.powf(S::lit(4.5)),
            TestFunction::Inv1px => S::one() / (S::one() + x),
            TestFunction::SinPiX => (S::PI() * x).sin(),
            TestFunction::Log1px => x.ln_1p(),
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestFunction::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown test function '{s}'")))
    }
}

/// `max |g|` over `SUP_NORM_SAMPLES + 1` equispaced points of `[c, d]`.
pub fn sup_norm<S: Scalar>(g: impl Fn(S) -> S, c: S, d: S) -> S {
    let n = SUP_NORM_SAMPLES;
    let h = (d - c) / S::count(n);
    (0..=n).fold(S::zero(), |acc, i| {
        let x = if i == n { d } else { c + S::count(i) * h };
        acc.max(g(x).abs())
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport<S> {
    /// `|∫ f g − Σ q g|`
    pub e_q: S,
    /// `|∫ f g − Σ p g|`
    pub e_p: S,
    /// `e_q + ‖g‖_∞ sqrt(2 H(P; Q))`
    pub pinsker_bound_value: S,
    pub sup_g: S,
    pub exact: S,
    pub kl: S,
}

impl<S: Scalar> ErrorReport<S> {
    pub fn rel_e_q(&self) -> S {
        self.e_q / self.exact.abs()
    }

    pub fn rel_e_p(&self) -> S {
        self.e_p / self.exact.abs()
    }

    /// Whether `e_p` respects the bound it was reported with.
    pub fn bound_holds(&self) -> bool {
        self.e_p <= self.pinsker_bound_value
    }
}

/// Expectation errors of `g` under `Q` and under the fitted `P`.
pub fn expectation_errors<S: Scalar>(
    density: &Density<S>,
    g: impl Fn(S) -> S,
    q: &InitialDiscretization<S>,
    solution: &MaxEntSolution<S>,
) -> Result<ErrorReport<S>> {
    if solution.probs.len() != q.probs().len() {
        return Err(Error::DimensionMismatch { expected: q.probs().len(), found: solution.probs.len() });
    }
    let exact = density.expectation_oracle(&g)?;
    let under_q = q.expectation(&g);
    let under_p = ordered_sum(solution.probs.iter().zip(q.points()).map(|(&p, &x)| p * g(x)));
    let (c, d) = density.support().working_interval();
    let sup_g = sup_norm(&g, c, d);
    let e_q = (exact - under_q).abs();
    Ok(ErrorReport {
        e_q,
        e_p: (exact - under_p).abs(),
        pinsker_bound_value: e_q + sup_g * (S::lit(2.0) * solution.kl).sqrt(),
        sup_g,
        exact,
        kl: solution.kl,
    })
}

/// `‖T̄ − Σ q T‖_2`.
pub fn moment_error<S: Scalar>(
    q: &InitialDiscretization<S>,
    t: &MomentDefiningFunction<S>,
    targets: &MomentTargets<S>,
) -> Result<S> {
    if targets.len() != t.len() {
        return Err(Error::DimensionMismatch { expected: t.len(), found: targets.len() });
    }
    let table = t.tabulate(q.set())?;
    let defect: Vec<S> = (0..t.len())
        .map(|l| targets.as_slice()[l] - ordered_sum(q.probs().iter().enumerate().map(|(i, &qi)| qi * table.row(i)[l])))
        .collect();
    Ok(norm2(&defect))
}

/// Degree-`L` interpolant through the Chebyshev extreme points of `[c, d]`, kept in the
/// Chebyshev basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevFit<S> {
    pub degree: usize,
    pub interval: (S, S),
    pub coefficients: Vec<S>,
    pub nodes: Vec<S>,
    pub sup_residual: S,
}

impl<S: Scalar> ChebyshevFit<S> {
    /// Clenshaw evaluation.
    pub fn eval(&self, x: S) -> S {
        let (c, d) = self.interval;
        let two = S::lit(2.0);
        let t = (two * x - c - d) / (d - c);
        let (mut b1, mut b2) = (S::zero(), S::zero());
        for &a in self.coefficients.iter().skip(1).rev() {
            let b0 = two * t * b1 - b2 + a;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coefficients[0]
    }

    pub fn log10_residual(&self) -> S {
        self.sup_residual.log10()
    }
}

pub fn chebyshev_nodes<S: Scalar>(c: S, d: S, degree: usize) -> Vec<S> {
    let two = S::lit(2.0);
    (0..=degree)
        .map(|j| (c + d) / two + (d - c) / two * (S::PI() * S::count(j) / S::count(degree)).cos())
        .collect()
}

pub fn chebyshev_fit<S: Scalar>(g: impl Fn(S) -> S, c: S, d: S, degree: usize) -> Result<ChebyshevFit<S>> {
    if degree == 0 || !(c < d) {
        return Err(Error::InvalidParams(format!("Chebyshev fit needs degree >= 1 and c < d (degree {degree})")));
    }
    let nodes = chebyshev_nodes(c, d, degree);
    let values: Vec<S> = nodes.iter().map(|&x| g(x)).collect();
    if let Some(j) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { component: 0, x: nodes[j].as_f64() });
    }
    let n = S::count(degree);
    let half = S::lit(0.5);
    // Discrete cosine transform on the Lobatto points; end terms carry half weight.
    let coefficients: Vec<S> = (0..=degree)
        .map(|k| {
            let sum = ordered_sum((0..=degree).map(|j| {
                let w = if j == 0 || j == degree { half } else { S::one() };
                w * values[j] * (S::PI() * S::count(j * k) / n).cos()
            }));
            let a = S::lit(2.0) / n * sum;
            if k == 0 || k == degree {
                a * half
            } else {
                a
            }
        })
        .collect();
    let mut fit = ChebyshevFit { degree, interval: (c, d), coefficients, nodes, sup_residual: S::zero() };
    fit.sup_residual = sup_norm(|x| g(x) - fit.eval(x), c, d);
    Ok(fit)
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow<S> {
    pub m: usize,
    pub points: usize,
    pub e_q: S,
    /// `None` when the solve failed at this `M`.
    pub e_p: Option<S>,
    pub kl: Option<S>,
    pub pinsker_bound: Option<S>,
    pub moment_residual: Option<S>,
    pub exact: S,
    /// Solver error name, if any.
    pub failure: Option<&'static str>,
    /// Fewer than `2(L+1)` points carry mass; fitted distributions tend to be erratic.
    pub sparse_warning: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy<S> {
    pub rows: Vec<ConvergenceRow<S>>,
    pub slope_q: Option<S>,
    pub slope_p: Option<S>,
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope<S: Scalar>(xs: &[S], ys: &[S]) -> Option<S> {
    let pts: Vec<(S, S)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > S::zero() && **y > S::zero())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = S::count(pts.len());
    let mx = ordered_sum(pts.iter().map(|p| p.0)) / n;
    let my = ordered_sum(pts.iter().map(|p| p.1)) / n;
    let sxy = ordered_sum(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)));
    let sxx = ordered_sum(pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)));
    (sxx > S::zero()).then(|| sxy / sxx)
}

/// Solves one `(M, rule, L)` cell and measures `g`.
pub fn study_cell<S: Scalar>(
    density: &Density<S>,
    g: impl Fn(S) -> S,
    rule: RuleKind,
    degree: usize,
    m: usize,
    cfg: &SolverConfig<S>,
) -> Result<ConvergenceRow<S>> {
    let set = default_grid(density, m)?;
    let weights = QuadratureRule::build(rule, &set)?;
    let q = initial_discretization(density, &set, &weights)?;
    let t = MomentDefiningFunction::polynomial(degree)?;
    let targets = targets_from_density(density, &t)?;
    let exact = density.expectation_oracle(&g)?;
    let e_q = (exact - q.expectation(&g)).abs();
    let sparse_warning = q.support_size() < 2 * (degree + 1);
    let mut row = ConvergenceRow {
        m,
        points: set.len(),
        e_q,
        e_p: None,
        kl: None,
        pinsker_bound: None,
        moment_residual: None,
        exact,
        failure: None,
        sparse_warning,
    };
    match solve_dual(&q, &t, &targets, cfg) {
        Ok(sol) => {
            let report = expectation_errors(density, &g, &q, &sol)?;
            row.e_p = Some(report.e_p);
            row.kl = Some(sol.kl);
            row.pinsker_bound = Some(report.pinsker_bound_value);
            row.moment_residual = Some(sol.moment_residual);
        }
        Err(e @ Error::NoConvergence { .. }) => return Err(e),
        Err(e) => row.failure = Some(e.kind_name()),
    }
    Ok(row)
}

/// Errors of `Q` and `P` over a range of `M`, with log–log slopes fitted on the upper
/// half of the range. Per-`M` solver failures are recorded in the rows.
pub fn convergence_study<S: Scalar>(
    density: &Density<S>,
    g: impl Fn(S) -> S,
    rule: RuleKind,
    degree: usize,
    m_range: &[usize],
    cfg: &SolverConfig<S>,
) -> Result<ConvergenceStudy<S>> {
    if m_range.is_empty() {
        return Err(Error::InvalidParams("convergence study needs at least one M".into()));
    }
    let mut ms = m_range.to_vec();
    ms.sort_unstable();
    ms.dedup();
    let rows = ms
        .iter()
        .map(|&m| study_cell(density, &g, rule, degree, m, cfg))
        .collect::<Result<Vec<_>>>()?;
    let (slope_q, slope_p) = fit_upper_half(&rows);
    Ok(ConvergenceStudy { rows, slope_q, slope_p })
}

/// Slopes of `e_q` and `e_p` over the upper half of the rows (by `M`).
pub fn fit_upper_half<S: Scalar>(rows: &[ConvergenceRow<S>]) -> (Option<S>, Option<S>) {
    let upper = &rows[rows.len() / 2..];
    let ms: Vec<S> = upper.iter().map(|r| S::count(r.m)).collect();
    let eq: Vec<S> = upper.iter().map(|r| r.e_q).collect();
    let slope_q = loglog_slope(&ms, &eq);
    let slope_p = if upper.iter().all(|r| r.e_p.is_some()) {
        let ep: Vec<S> = upper.iter().filter_map(|r| r.e_p).collect();
        loglog_slope(&ms, &ep)
    } else {
        None
    };
    (slope_q, slope_p)
}
