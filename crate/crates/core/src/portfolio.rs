//! One risky and one riskless asset under CRRA utility, with the lognormal stock return
//! discretized on a symmetric grid.

use crate::density::Density;
use crate::error::{Error, Result};
use crate::grid::{initial_discretization, symmetric_grid, DiscreteSet, InitialDiscretization, QuadratureRule, RuleKind};
use crate::maxent::{solve_dual, MaxEntSolution, SolverConfig};
use crate::moments::{targets_from_density, MomentDefiningFunction};
use crate::scalar::{ordered_sum, Scalar};

/// Converged optimal weight for `γ = 3, μ = 0.07, σ = 0.2, r = 0.01`, used as the
/// reference for relative errors.
pub const REFERENCE_THETA: f64 = 0.6681;

const GOLDEN_ITERS: usize = 60;
const BISECTION_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortfolioProblem<S> {
    /// Relative risk aversion `γ > 0`, `γ ≠ 1`.
    pub gamma: S,
    /// Mean of `log R_1`.
    pub mu: S,
    /// Standard deviation of `log R_1`.
    pub sigma: S,
    /// `log R_2`.
    pub r: S,
    /// Positive grid points; the grid has `2M + 1` points spaced `1/sqrt(M)`.
    pub m: usize,
    /// Highest polynomial moment matched; 0 keeps the plain quadrature weights.
    pub moments: usize,
    pub rule: RuleKind,
}

impl<S: Scalar> PortfolioProblem<S> {
    pub fn new(gamma: S, mu: S, sigma: S, r: S, m: usize, moments: usize) -> Result<Self> {
        let p = Self { gamma, mu, sigma, r, m, moments, rule: RuleKind::Trapezoid };
        p.validate()?;
        Ok(p)
    }

    /// `γ = 3, μ = 0.07, σ = 0.2, r = 0.01`.
    pub fn reference(m: usize, moments: usize) -> Self {
        Self::new(S::lit(3.0), S::lit(0.07), S::lit(0.2), S::lit(0.01), m, moments)
            .expect("reference parameters are valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > S::zero()) || self.gamma == S::one() {
            return Err(Error::InvalidParams(format!("gamma must be positive and != 1, got {}", self.gamma)));
        }
        if !(self.sigma > S::zero()) || !self.mu.is_finite() || !self.r.is_finite() {
            return Err(Error::InvalidParams("sigma must be positive, mu and r finite".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidParams("M must be at least 1".into()));
        }
        Ok(())
    }

    pub fn riskless_return(&self) -> S {
        self.r.exp()
    }
}

/// Discrete stock return: probabilities on atoms `e^{μ + σx}`.
#[derive(Debug, Clone)]
pub struct StockReturnDistribution<S> {
    pub grid: DiscreteSet<S>,
    pub initial: InitialDiscretization<S>,
    pub probs: Vec<S>,
    pub atoms: Vec<S>,
    pub solution: Option<MaxEntSolution<S>>,
}

/// Discretizes `N(0, 1)` on `{mh : |m| ≤ M}`, `h = 1/sqrt(M)`, optionally matching its
/// first `L` moments, and maps `x ↦ e^{μ + σx}`.
pub fn discretize_stock_return<S: Scalar>(p: &PortfolioProblem<S>, cfg: &SolverConfig<S>) -> Result<StockReturnDistribution<S>> {
    p.validate()?;
    let grid = symmetric_grid(p.m, S::one() / S::count(p.m).sqrt())?;
    let normal = Density::std_normal();
    let rule = QuadratureRule::build(p.rule, &grid)?;
    let initial = initial_discretization(&normal, &grid, &rule)?;
    let (probs, solution) = if p.moments == 0 {
        (initial.probs().to_vec(), None)
    } else {
        let t = MomentDefiningFunction::polynomial(p.moments)?;
        let targets = targets_from_density(&normal, &t)?;
        let sol = solve_dual(&initial, &t, &targets, cfg)?;
        (sol.probs.clone(), Some(sol))
    };
    let atoms = grid.points().iter().map(|&x| (p.mu + p.sigma * x).exp()).collect();
    Ok(StockReturnDistribution { grid, initial, probs, atoms, solution })
}

/// `(1/(1−γ)) Σ p_i (θ R_{1,i} + (1−θ) R_2)^{1−γ}`.
pub fn expected_utility<S: Scalar>(atoms: &[S], probs: &[S], p: &PortfolioProblem<S>, theta: S) -> Result<S> {
    let r2 = p.riskless_return();
    let expo = S::one() - p.gamma;
    let mut terms = Vec::with_capacity(atoms.len());
    for (i, (&a, &pi)) in atoms.iter().zip(probs).enumerate() {
        let w = theta * a + (S::one() - theta) * r2;
        if !(w > S::zero()) {
            return Err(Error::DomainViolation { index: i });
        }
        terms.push(pi * w.powf(expo));
    }
    Ok(ordered_sum(terms) / expo)
}

/// `E[(θX + R_2)^{−γ} X]` with `X = R_1 − R_2`: the derivative of expected utility.
pub fn first_order_condition<S: Scalar>(atoms: &[S], probs: &[S], p: &PortfolioProblem<S>, theta: S) -> S {
    let r2 = p.riskless_return();
    ordered_sum(atoms.iter().zip(probs).map(|(&a, &pi)| {
        let x = a - r2;
        pi * (theta * x + r2).powf(-p.gamma) * x
    }))
}

/// Open interval of `θ` for which every atom's portfolio return is positive.
pub fn feasible_theta_interval<S: Scalar>(atoms: &[S], r: S) -> Result<(S, S)> {
    let r2 = r.exp();
    let mut lo = S::neg_infinity();
    let mut hi = S::infinity();
    for &a in atoms {
        let x = a - r2;
        if x > S::zero() {
            lo = lo.max(-r2 / x);
        } else if x < S::zero() {
            hi = hi.min(r2 / -x);
        }
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::NoInteriorOptimum(
            "the risky asset dominates or is dominated by the riskless one on every atom".into(),
        ));
    }
    Ok((lo, hi))
}

/// Golden-section maximization of a unimodal `f` on `[a, b]`; returns the final bracket.
pub fn golden_section_max<S: Scalar>(f: impl Fn(S) -> S, mut a: S, mut b: S, iters: usize) -> (S, S) {
    let inv_phi = (S::lit(5.0).sqrt() - S::one()) / S::lit(2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a, b)
}

/// Bisection for the root of a decreasing function with `f(a) > 0 > f(b)`.
fn bisect_decreasing<S: Scalar>(f: impl Fn(S) -> S, mut a: S, mut b: S) -> S {
    let two = S::lit(2.0);
    for _ in 0..BISECTION_ITERS {
        let mid = (a + b) / two;
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) > S::zero() {
            a = mid;
        } else {
            b = mid;
        }
    }
    (a + b) / two
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioSolution<S> {
    pub theta: S,
    pub utility: S,
    /// `(θ − θ*)/θ*` against [`REFERENCE_THETA`].
    pub rel_error_vs_reference: Option<S>,
}

/// Maximizes expected utility over the feasible interval for a given discrete return.
pub fn optimize_theta<S: Scalar>(atoms: &[S], probs: &[S], p: &PortfolioProblem<S>) -> Result<S> {
    let (lo, hi) = feasible_theta_interval(atoms, p.r)?;
    let margin = (hi - lo) * S::lit(1e-12);
    let (a, b) = (lo + margin, hi - margin);
    let utility = |t: S| expected_utility(atoms, probs, p, t).unwrap_or(S::neg_infinity());
    let foc = |t: S| first_order_condition(atoms, probs, p, t);
    let (ga, gb) = golden_section_max(utility, a, b, GOLDEN_ITERS);
    // Refine on the analytic first-order condition; widen to the full interval if the
    // golden bracket does not straddle the root.
    let (ba, bb) = if foc(ga) > S::zero() && foc(gb) < S::zero() { (ga, gb) } else { (a, b) };
    Ok(bisect_decreasing(foc, ba, bb))
}

pub fn solve_portfolio<S: Scalar>(p: &PortfolioProblem<S>, cfg: &SolverConfig<S>) -> Result<PortfolioSolution<S>> {
    let dist = discretize_stock_return(p, cfg)?;
    let theta = optimize_theta(&dist.atoms, &dist.probs, p)?;
    let utility = expected_utility(&dist.atoms, &dist.probs, p, theta)?;
    let reference = S::lit(REFERENCE_THETA);
    Ok(PortfolioSolution { theta, utility, rel_error_vs_reference: Some((theta - reference) / reference) })
}

/// `θ ≈ R_2 E[X] / (γ Var[X] − E[X]^2)` from a first-order expansion of the optimality
/// condition around the mean portfolio return.
pub fn taylor_theta_approx<S: Scalar>(p: &PortfolioProblem<S>, mean_x: S, var_x: S) -> Result<S> {
    let denom = p.gamma * var_x - mean_x * mean_x;
    if !(denom > S::zero()) {
        return Err(Error::DegenerateDenominator);
    }
    Ok(p.riskless_return() * mean_x / denom)
}

/// Exact mean and variance of `X = R_1 − R_2` for lognormal `R_1`.
pub fn lognormal_excess_moments<S: Scalar>(p: &PortfolioProblem<S>) -> (S, S) {
    let two = S::lit(2.0);
    let s2 = p.sigma * p.sigma;
    let m1 = (p.mu + s2 / two).exp();
    let m2 = (two * p.mu + two * s2).exp();
    (m1 - p.riskless_return(), m2 - m1 * m1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_atom_trapezoid() {
        let p = PortfolioProblem::<f64>::reference(1, 0);
        let d = discretize_stock_return(&p, &SolverConfig::default()).unwrap();
        assert_eq!(d.atoms.len(), 3);
        assert!((d.atoms[0] - (0.07f64 - 0.2).exp()).abs() < 1e-15);
        assert!((d.atoms[1] - 0.07f64.exp()).abs() < 1e-15);
        assert!((d.atoms[2] - 0.27f64.exp()).abs() < 1e-15);
        let phi = |x: f64| (-x * x / 2.0).exp();
        let z = phi(1.0) + phi(0.0);
        assert!((d.probs[1] - phi(0.0) / z).abs() < 1e-15);
        assert!(d.solution.is_none());
    }

    #[test]
    fn riskless_portfolio_utility() {
        let p = PortfolioProblem::<f64>::reference(4, 0);
        let d = discretize_stock_return(&p, &SolverConfig::default()).unwrap();
        let u = expected_utility(&d.atoms, &d.probs, &p, 0.0).unwrap();
        let expect = (0.01f64 * (1.0 - 3.0)).exp() / (1.0 - 3.0);
        assert!((u - expect).abs() < 1e-14);
    }

    #[test]
    fn degenerate_atom_ignores_theta() {
        let p = PortfolioProblem::<f64>::reference(1, 0);
        let r2 = p.riskless_return();
        let a = expected_utility(&[r2], &[1.0], &p, 0.3).unwrap();
        let b = expected_utility(&[r2], &[1.0], &p, 1.7).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn domain_violation() {
        let p = PortfolioProblem::<f64>::reference(1, 0);
        let err = expected_utility(&[0.5, 1.5], &[0.5, 0.5], &p, 10.0).unwrap_err();
        assert_eq!(err.kind_name(), "DomainViolation");
    }

    #[test]
    fn parameter_validation() {
        assert!(PortfolioProblem::<f64>::new(1.0, 0.07, 0.2, 0.01, 1, 0).is_err());
        assert!(PortfolioProblem::<f64>::new(3.0, 0.07, 0.0, 0.01, 1, 0).is_err());
        assert!(PortfolioProblem::<f64>::new(3.0, 0.07, 0.2, 0.01, 0, 0).is_err());
    }

    #[test]
    fn feasible_interval_from_atoms() {
        let (lo, hi) = feasible_theta_interval(&[0.5f64, 2.0], 0.0).unwrap();
        assert!((lo + 1.0).abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);
        assert!(feasible_theta_interval(&[1.5f64, 2.0], 0.0).is_err());
    }

    #[test]
    fn taylor_formula() {
        let p = PortfolioProblem::<f64>::reference(1, 0);
        assert_eq!(taylor_theta_approx(&p, 0.0, 0.04).unwrap(), 0.0);
        assert_eq!(taylor_theta_approx(&p, 0.3, 0.01).unwrap_err(), Error::DegenerateDenominator);
        let (m, v) = lognormal_excess_moments(&p);
        let theta = taylor_theta_approx(&p, m, v).unwrap();
        assert!(((theta - REFERENCE_THETA) / REFERENCE_THETA).abs() < 0.10, "{theta}");
        let doubled = PortfolioProblem { gamma: 6.0, ..p };
        let half = taylor_theta_approx(&doubled, 0.01, 0.04).unwrap();
        let full = taylor_theta_approx(&p, 0.01, 0.04).unwrap();
        assert!((half / full - 0.5).abs() < 0.01);
    }

    #[test]
    fn converged_grid_reference_theta() {
        let p = PortfolioProblem::<f64>::reference(25, 4);
        let s = solve_portfolio(&p, &SolverConfig::default()).unwrap();
        assert!((s.theta - REFERENCE_THETA).abs() < 5e-4);
        let d = discretize_stock_return(&p, &SolverConfig::default()).unwrap();
        let foc = first_order_condition(&d.atoms, &d.probs, &p, REFERENCE_THETA);
        assert!(foc.abs() <= 1e-4, "{foc}");
    }

    #[test]
    fn golden_and_foc_agree() {
        let p = PortfolioProblem::<f64>::reference(9, 2);
        let d = discretize_stock_return(&p, &SolverConfig::default()).unwrap();
        let theta = optimize_theta(&d.atoms, &d.probs, &p).unwrap();
        let (lo, hi) = feasible_theta_interval(&d.atoms, p.r).unwrap();
        let (a, b) = golden_section_max(|t| expected_utility(&d.atoms, &d.probs, &p, t).unwrap(), lo * 0.999, hi * 0.999, 200);
        assert!(((a + b) / 2.0 - theta).abs() < 1e-6);
        assert!(theta > lo && theta < hi);
    }
}
