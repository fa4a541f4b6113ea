//! Minimum-KL projection of an initial discretization onto the moment constraints.
//!
//! The primal problem `min Σ p log(p/q)` subject to `Σ p T(x) = T̄`, `Σ p = 1`, `p ≥ 0`
//! is solved through its dual: minimize
//!
//! ```text
//! J(λ) = Σ_i q_i exp(⟨λ, T(x_i) − T̄⟩)
//! ```
//!
//! with a κ-regularized Newton iteration started at `λ = 0`. The minimizer gives the
//! exponential tilt `p_i ∝ q_i exp(⟨λ, T(x_i)⟩)` and `H(P; Q) = −log min J`.
//!
//! Everything here is written against tabulated moment values ([`MomentTable`]), so the
//! points themselves may live in any dimension.

use crate::error::{Error, Result};
use crate::grid::InitialDiscretization;
use crate::linalg::{Cholesky, SquareMatrix};
use crate::moments::{feasibility_precheck_table, Feasibility, MomentDefiningFunction, MomentTable, MomentTargets};
use crate::scalar::{norm2, norm_inf, ordered_sum, Scalar};

/// Relative Cholesky pivot below which the standardized moment covariance is treated as
/// singular (affinely dependent components). Legitimate degree-6 problems sit above 1e-8.
const DEPENDENCE_PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<S> {
    /// Newton regularizer κ.
    pub kappa: S,
    /// Stop once a Newton step is shorter than this (in working coordinates).
    pub stop_tol: S,
    /// Stationarity certificate: `‖∇J‖` at the accepted point.
    pub grad_tol: S,
    /// Largest accepted `‖Σ p T − T̄‖_∞`.
    pub residual_tol: S,
    pub max_iters: usize,
    /// `‖λ‖` (working coordinates) beyond which the dual is declared unbounded.
    pub lambda_blowup: S,
    /// Standardize each moment component under `Q` before iterating.
    pub scaling: bool,
    /// κ is raised tenfold on a failed factorization, up to this value.
    pub max_kappa: S,
    pub max_halvings: usize,
}

impl<S: Scalar> Default for SolverConfig<S> {
    fn default() -> Self {
        Self {
            kappa: S::lit(1e-7),
            stop_tol: S::lit(1e-10),
            grad_tol: S::lit(1e-9),
            residual_tol: S::lit(1e-8),
            max_iters: 200,
            lambda_blowup: S::lit(1e6),
            scaling: true,
            max_kappa: S::lit(1e-3),
            max_halvings: 30,
        }
    }
}

impl<S: Scalar> SolverConfig<S> {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.kappa, self.stop_tol, self.grad_tol, self.residual_tol, self.lambda_blowup, self.max_kappa];
        if positive.iter().any(|v| !(*v > S::zero())) || self.max_iters == 0 {
            return Err(Error::InvalidParams("solver tolerances and limits must be positive".into()));
        }
        Ok(())
    }
}

/// How the iteration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// A Newton step fell below `stop_tol` with a stationary gradient.
    StepTolerance,
    /// The iteration never settled but the moments are matched to `residual_tol`.
    /// Happens when `T̄` lies on the boundary of `conv T(D)`: the dual optimum is not
    /// attained and the returned `P` is the limit with vanishing mass on some points.
    BoundaryLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualState<S> {
    /// Dual vector in the caller's coordinates.
    pub lambda: Vec<S>,
    pub j_value: S,
    pub grad_norm: S,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxEntSolution<S> {
    pub probs: Vec<S>,
    pub dual: DualState<S>,
    /// `H(P; Q) = −log J(λ*)`.
    pub kl: S,
    pub moment_residual: S,
}

fn check_dims<S: Scalar>(q: &[S], table: &MomentTable<S>, targets: &[S], lambda: Option<&[S]>) -> Result<()> {
    if table.rows() != q.len() {
        return Err(Error::DimensionMismatch { expected: q.len(), found: table.rows() });
    }
    if targets.len() != table.width() {
        return Err(Error::DimensionMismatch { expected: table.width(), found: targets.len() });
    }
    if let Some(l) = lambda {
        if l.len() != table.width() {
            return Err(Error::DimensionMismatch { expected: table.width(), found: l.len() });
        }
    }
    Ok(())
}

/// Exponents `⟨λ, T_i − T̄⟩` over the points with `q_i > 0` and their maximum.
fn exponents<S: Scalar>(q: &[S], table: &MomentTable<S>, targets: &[S], lambda: &[S]) -> (Vec<S>, S) {
    let mut max = S::neg_infinity();
    let z = (0..q.len())
        .map(|i| {
            if q[i] > S::zero() {
                let zi = ordered_sum(table.row(i).iter().zip(targets).zip(lambda).map(|((&t, &tb), &l)| l * (t - tb)));
                max = max.max(zi);
                zi
            } else {
                S::neg_infinity()
            }
        })
        .collect();
    (z, max)
}

/// `log J(λ)`, evaluated in shifted form so it never overflows.
pub fn log_dual_objective<S: Scalar>(q: &[S], table: &MomentTable<S>, targets: &[S], lambda: &[S]) -> Result<S> {
    check_dims(q, table, targets, Some(lambda))?;
    let (z, m) = exponents(q, table, targets, lambda);
    let s = ordered_sum(q.iter().zip(&z).filter(|(&qi, _)| qi > S::zero()).map(|(&qi, &zi)| qi * (zi - m).exp()));
    Ok(m + s.ln())
}

/// `J(λ) = Σ q_i exp(⟨λ, T_i − T̄⟩)`.
pub fn dual_objective<S: Scalar>(q: &[S], table: &MomentTable<S>, targets: &[S], lambda: &[S]) -> Result<S> {
    log_dual_objective(q, table, targets, lambda).map(S::exp)
}

/// `∇J(λ) = Σ q_i exp(⟨λ, T_i − T̄⟩) (T_i − T̄)`.
pub fn dual_gradient<S: Scalar>(q: &[S], table: &MomentTable<S>, targets: &[S], lambda: &[S]) -> Result<Vec<S>> {
    check_dims(q, table, targets, Some(lambda))?;
    let (z, m) = exponents(q, table, targets, lambda);
    let scale = m.exp();
    let mut grad = vec![S::zero(); targets.len()];
    for i in (0..q.len()).filter(|&i| q[i] > S::zero()) {
        let e = q[i] * (z[i] - m).exp();
        for (g, (&t, &tb)) in grad.iter_mut().zip(table.row(i).iter().zip(targets)) {
            *g = *g + e * (t - tb);
        }
    }
    Ok(grad.into_iter().map(|g| g * scale).collect())
}

/// `∇²J(λ) = Σ q_i exp(⟨λ, T_i − T̄⟩) (T_i − T̄)(T_i − T̄)ᵀ`.
pub fn dual_hessian<S: Scalar>(q: &[S], table: &MomentTable<S>, targets: &[S], lambda: &[S]) -> Result<SquareMatrix<S>> {
    check_dims(q, table, targets, Some(lambda))?;
    let (z, m) = exponents(q, table, targets, lambda);
    let mut h = SquareMatrix::zeros(targets.len());
    let mut d = vec![S::zero(); targets.len()];
    for i in (0..q.len()).filter(|&i| q[i] > S::zero()) {
        for ((dl, &t), &tb) in d.iter_mut().zip(table.row(i)).zip(targets) {
            *dl = t - tb;
        }
        h.add_outer_upper(q[i] * (z[i] - m).exp(), &d);
    }
    h.mirror_upper();
    h.scale(m.exp());
    Ok(h)
}

/// `Σ_{p_i > 0} p_i log(p_i / q_i)`.
pub fn kl_divergence<S: Scalar>(p: &[S], q: &[S]) -> Result<S> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: q.len(), found: p.len() });
    }
    let mut terms = Vec::with_capacity(p.len());
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi > S::zero() {
            if !(qi > S::zero()) {
                return Err(Error::AbsoluteContinuityViolated { index: i });
            }
            terms.push(pi * (pi / qi).ln());
        }
    }
    Ok(ordered_sum(terms))
}

/// `sqrt(2 H(P; Q))`, an upper bound on `‖P − Q‖_1`.
pub fn pinsker_bound<S: Scalar>(p: &[S], q: &[S]) -> Result<S> {
    Ok((S::lit(2.0) * kl_divergence(p, q)?.max(S::zero())).sqrt())
}

/// `‖P − Q‖_1`.
pub fn total_variation_l1<S: Scalar>(p: &[S], q: &[S]) -> S {
    ordered_sum(p.iter().zip(q).map(|(&a, &b)| (a - b).abs()))
}

/// Working-coordinate problem restricted to the support of `Q`.
struct Working<S> {
    q: Vec<S>,
    /// `D_i = U_i − Ū` per active point, row-major.
    centered: Vec<S>,
    width: usize,
    /// Per-component divisor mapping working λ back to caller λ.
    scale: Vec<S>,
}

struct Eval<S> {
    log_j: S,
    /// `E_P[D]` under the tilt at the evaluation point.
    mean: Vec<S>,
    /// `E_P[D Dᵀ]`.
    second: SquareMatrix<S>,
}

impl<S: Scalar> Working<S> {
    fn rows(&self) -> usize {
        self.q.len()
    }

    fn row(&self, i: usize) -> &[S] {
        &self.centered[i * self.width..(i + 1) * self.width]
    }

    /// Returns the shift `m` and unnormalized weights `q_i exp(z_i − m)`.
    fn tilt(&self, lambda: &[S]) -> (S, Vec<S>) {
        let z: Vec<S> = (0..self.rows())
            .map(|i| ordered_sum(self.row(i).iter().zip(lambda).map(|(&d, &l)| d * l)))
            .collect();
        let m = z.iter().fold(S::neg_infinity(), |a, &b| a.max(b));
        let e = self.q.iter().zip(&z).map(|(&q, &zi)| q * (zi - m).exp()).collect();
        (m, e)
    }

    fn log_j(&self, lambda: &[S]) -> S {
        let (m, e) = self.tilt(lambda);
        m + ordered_sum(e).ln()
    }

    fn eval(&self, lambda: &[S]) -> Eval<S> {
        let (m, e) = self.tilt(lambda);
        let s = ordered_sum(e.iter().copied());
        let mut mean = vec![S::zero(); self.width];
        let mut second = SquareMatrix::zeros(self.width);
        for (i, &ei) in e.iter().enumerate() {
            let w = ei / s;
            let d = self.row(i);
            for (acc, &dl) in mean.iter_mut().zip(d) {
                *acc = *acc + w * dl;
            }
            second.add_outer_upper(w, d);
        }
        second.mirror_upper();
        Eval { log_j: m + s.ln(), mean, second }
    }
}

/// Solves the projection for `Q` on a grid with moment function `t`.
pub fn solve_dual<S: Scalar>(
    q: &InitialDiscretization<S>,
    t: &MomentDefiningFunction<S>,
    targets: &MomentTargets<S>,
    cfg: &SolverConfig<S>,
) -> Result<MaxEntSolution<S>> {
    let table = t.tabulate(q.set())?;
    solve_dual_table(q.probs(), &table, targets.as_slice(), cfg)
}

/// Same as [`solve_dual`] on pre-tabulated moment values.
pub fn solve_dual_table<S: Scalar>(
    q: &[S],
    table: &MomentTable<S>,
    targets: &[S],
    cfg: &SolverConfig<S>,
) -> Result<MaxEntSolution<S>> {
    cfg.validate()?;
    check_dims(q, table, targets, None)?;
    let width = table.width();
    let active: Vec<usize> = (0..q.len()).filter(|&i| q[i] > S::zero()).collect();
    if active.len() < width + 1 {
        return Err(Error::TooFewPoints { points: active.len(), constraints: width + 1 });
    }
    if let Feasibility::Infeasible { component } = feasibility_precheck_table(table, active.iter().copied(), targets) {
        return Err(Error::Infeasible { component });
    }

    let q_total = ordered_sum(active.iter().map(|&i| q[i]));
    let q_act: Vec<S> = active.iter().map(|&i| q[i] / q_total).collect();

    // Standardize under Q. The covariance check also catches affinely dependent components.
    let mut mean = vec![S::zero(); width];
    for (k, &i) in active.iter().enumerate() {
        for (m, &t) in mean.iter_mut().zip(table.row(i)) {
            *m = *m + q_act[k] * t;
        }
    }
    let mut cov = SquareMatrix::zeros(width);
    let mut dev = vec![S::zero(); width];
    for (k, &i) in active.iter().enumerate() {
        for ((d, &t), &m) in dev.iter_mut().zip(table.row(i)).zip(&mean) {
            *d = t - m;
        }
        cov.add_outer_upper(q_act[k], &dev);
    }
    cov.mirror_upper();
    let sd: Vec<S> = (0..width).map(|l| cov.get(l, l).sqrt()).collect();
    if sd.iter().zip(&mean).any(|(&s, &m)| !(s > S::epsilon() * (S::one() + m.abs()))) {
        return Err(Error::SingularHessian);
    }
    let mut corr = cov.clone();
    for i in 0..width {
        for j in 0..width {
            corr.set(i, j, cov.get(i, j) / (sd[i] * sd[j]));
        }
    }
    if Cholesky::factor_shifted(&corr, S::zero(), S::lit(DEPENDENCE_PIVOT_TOL)).is_none() {
        return Err(Error::SingularHessian);
    }

    let (shift, scale): (Vec<S>, Vec<S>) = if cfg.scaling {
        (mean.clone(), sd.clone())
    } else {
        (vec![S::zero(); width], vec![S::one(); width])
    };
    let mut centered = Vec::with_capacity(active.len() * width);
    for &i in &active {
        for l in 0..width {
            let u = (table.row(i)[l] - shift[l]) / scale[l];
            let ubar = (targets[l] - shift[l]) / scale[l];
            centered.push(u - ubar);
        }
    }
    let work = Working { q: q_act, centered, width, scale };

    let (lambda_w, iterations, converged) = newton(&work, cfg)?;

    // Tilted probabilities back on the full grid.
    let (_, e) = work.tilt(&lambda_w);
    let s = ordered_sum(e.iter().copied());
    let mut probs = vec![S::zero(); q.len()];
    for (k, &i) in active.iter().enumerate() {
        probs[i] = e[k] / s;
    }
    let residual_vec: Vec<S> = (0..width)
        .map(|l| ordered_sum(active.iter().map(|&i| probs[i] * table.row(i)[l])) - targets[l])
        .collect();
    let moment_residual = norm_inf(&residual_vec);
    let lambda: Vec<S> = lambda_w.iter().zip(&work.scale).map(|(&l, &s)| l / s).collect();

    // J → 0 along a ray when T̄ is outside the hull, which can also satisfy the step
    // criterion; only matched moments count as success.
    if !(moment_residual <= cfg.residual_tol) {
        return Err(Error::DivergedInfeasible {
            iterations,
            lambda_norm: norm2(&lambda_w).as_f64(),
            residual: moment_residual.as_f64(),
        });
    }
    let termination = if converged { Termination::StepTolerance } else { Termination::BoundaryLimit };

    // J relative to the caller's Q (which may not have been normalized over the support).
    let log_j = work.log_j(&lambda_w) + q_total.ln();
    let j_value = log_j.exp();
    let kl = (-log_j).max(S::zero());
    let grad_norm = j_value * norm2(&residual_vec);
    Ok(MaxEntSolution {
        probs,
        dual: DualState { lambda, j_value, grad_norm, iterations, termination },
        kl,
        moment_residual,
    })
}

/// Regularized Newton on the working problem. Returns `(λ, iterations, converged)`;
/// `converged == false` means the step criterion was never met (iteration cap,
/// blow-up or a stalled line search) and the caller decides what that means.
fn newton<S: Scalar>(work: &Working<S>, cfg: &SolverConfig<S>) -> Result<(Vec<S>, usize, bool)> {
    let width = work.width;
    let mut lambda = vec![S::zero(); width];
    let mut cur = work.eval(&lambda);
    let ascent_tol = S::lit(8.0) * S::epsilon();

    for iter in 1..=cfg.max_iters {
        // (κI + ∇²J) s = ∇J with ∇J = J·E[D], ∇²J = J·E[DDᵀ]; divide through by J.
        let j = cur.log_j.exp();
        let mut kappa = cfg.kappa;
        let step = loop {
            let shift = if j > S::zero() { kappa / j } else { S::infinity() };
            if let Some(ch) = Cholesky::factor_shifted(&cur.second, shift, S::epsilon()) {
                break ch.solve(&cur.mean);
            }
            kappa = kappa * S::lit(10.0);
            if kappa > cfg.max_kappa {
                return Err(Error::SingularHessian);
            }
        };

        // Halve until J does not increase.
        let mut t = S::one();
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<S> = lambda.iter().zip(&step).map(|(&l, &s)| l - t * s).collect();
            let next = work.eval(&trial);
            if next.log_j <= cur.log_j + ascent_tol * (S::one() + cur.log_j.abs()) {
                accepted = Some((trial, next));
                break;
            }
            t = t / S::lit(2.0);
        }
        let Some((trial, next)) = accepted else {
            return Ok((lambda, iter, false));
        };

        let step_norm = t * norm2(&step);
        lambda = trial;
        cur = next;

        if norm2(&lambda) > cfg.lambda_blowup {
            return Ok((lambda, iter, false));
        }
        let grad_norm = cur.log_j.exp() * norm2(&cur.mean);
        if step_norm < cfg.stop_tol && grad_norm <= cfg.grad_tol {
            return Ok((lambda, iter, true));
        }
    }
    Ok((lambda, cfg.max_iters, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{symmetric_grid, trapezoid_weights, uniform_grid, initial_discretization};
    use crate::density::Density;
    use crate::moments::targets_from_density;

    fn table(points: &[f64], degree: usize) -> MomentTable<f64> {
        let rows: Vec<Vec<f64>> = points.iter().map(|&x| (1..=degree).map(|l| x.powi(l as i32)).collect()).collect();
        MomentTable::from_rows(&rows).unwrap()
    }

    #[test]
    fn objective_at_origin_is_one() {
        let q = [0.2, 0.3, 0.5];
        let t = table(&[0.0, 0.4, 1.0], 2);
        assert!((dual_objective(&q, &t, &[0.3, 0.2], &[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn objective_closed_form() {
        let v = dual_objective(&[0.5, 0.5], &table(&[0.0, 1.0], 1), &[0.5], &[1.0]).unwrap();
        assert!((v - 0.5f64.cosh()).abs() < 1e-15);
        assert!((v - 1.127_625_965_206_380_8).abs() < 1e-15);
    }

    #[test]
    fn objective_survives_large_exponents() {
        let log_j = log_dual_objective(&[0.5, 0.5], &table(&[0.0, 1.0], 1), &[0.5], &[2000.0]).unwrap();
        assert!((log_j - (1000.0 + 0.5f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn gradient_at_origin_is_moment_defect() {
        let q = [0.25, 0.5, 0.25];
        let t = table(&[0.0, 0.5, 1.0], 2);
        let g = dual_gradient(&q, &t, &[0.5, 1.0 / 3.0], &[0.0, 0.0]).unwrap();
        assert!(g[0].abs() < 1e-16);
        assert!((g[1] - (0.375 - 1.0 / 3.0)).abs() < 1e-16);
    }

    #[test]
    fn hessian_vanishes_on_exact_single_point() {
        let h = dual_hessian(&[1.0, 0.0], &table(&[0.5, 1.0], 1), &[0.5], &[3.0]).unwrap();
        assert_eq!(h.get(0, 0), 0.0);
    }

    #[test]
    fn kl_and_pinsker_basics() {
        assert_eq!(kl_divergence(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert!((kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - 2f64.ln()).abs() < 1e-16);
        assert_eq!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).unwrap_err().kind_name(), "AbsoluteContinuityViolated");
        assert_eq!(pinsker_bound(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        let b = pinsker_bound(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((b - (2.0 * 2f64.ln()).sqrt()).abs() < 1e-15);
        assert!(total_variation_l1(&[1.0, 0.0], &[0.5, 0.5]) <= b);
    }

    #[test]
    fn exact_q_needs_no_tilt() {
        let set = uniform_grid(0.0f64, 1.0, 1).unwrap();
        let q = InitialDiscretization::from_probs(set, vec![0.25, 0.5, 0.25]).unwrap();
        let t = MomentDefiningFunction::polynomial(1).unwrap();
        let sol = solve_dual(&q, &t, &MomentTargets::user(vec![0.5]), &SolverConfig::default()).unwrap();
        assert_eq!(sol.dual.iterations, 1);
        assert!(sol.dual.lambda[0].abs() < 1e-14);
        assert!(sol.kl.abs() < 1e-15);
        for (p, q) in sol.probs.iter().zip(q.probs()) {
            assert!((p - q).abs() < 1e-15);
        }
    }

    /// Scalar first-order condition Σ q e^{λx}(x − t̄) = 0 located by bisection.
    fn bisect_scalar_dual(q: &[f64], x: &[f64], target: f64) -> f64 {
        let foc = |l: f64| q.iter().zip(x).map(|(qi, xi)| qi * (l * xi).exp() * (xi - target)).sum::<f64>();
        let (mut lo, mut hi) = (-50.0, 50.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if foc(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn matches_scalar_bisection() {
        let x = [0.0, 0.5, 1.0];
        let q = [1.0 / 3.0; 3];
        let lam = bisect_scalar_dual(&q, &x, 0.6);
        let z: f64 = q.iter().zip(&x).map(|(qi, xi)| qi * (lam * xi).exp()).sum();
        let expected: Vec<f64> = q.iter().zip(&x).map(|(qi, xi)| qi * (lam * xi).exp() / z).collect();

        let sol = solve_dual_table(&q, &table(&x, 1), &[0.6], &SolverConfig::default()).unwrap();
        assert!((sol.dual.lambda[0] - lam).abs() < 1e-9);
        for (p, e) in sol.probs.iter().zip(&expected) {
            assert!((p - e).abs() < 1e-12);
        }
        assert_eq!(sol.dual.termination, Termination::StepTolerance);
    }

    #[test]
    fn beta_trapezoid_quadratic_moments() {
        let d = Density::beta(1.0, 3.0).unwrap();
        let set = uniform_grid(0.0, 1.0, 4).unwrap();
        let q = initial_discretization(&d, &set, &trapezoid_weights(&set).unwrap()).unwrap();
        let t = MomentDefiningFunction::polynomial(2).unwrap();
        let targets = targets_from_density(&d, &t).unwrap();
        let sol = solve_dual(&q, &t, &targets, &SolverConfig::default()).unwrap();
        let m1: f64 = sol.probs.iter().zip(set.points()).map(|(p, x)| p * x).sum();
        let m2: f64 = sol.probs.iter().zip(set.points()).map(|(p, x)| p * x * x).sum();
        assert!((m1 - 0.25).abs() < 1e-8);
        assert!((m2 - 0.1).abs() < 1e-8);
        assert!(sol.moment_residual <= 1e-8);
        assert_eq!(sol.probs[8], 0.0);
    }

    #[test]
    fn unscaled_mode_agrees() {
        let d = Density::<f64>::beta(2.0, 4.0).unwrap();
        let set = uniform_grid(0.0, 1.0, 8).unwrap();
        let q = initial_discretization(&d, &set, &trapezoid_weights(&set).unwrap()).unwrap();
        let t = MomentDefiningFunction::polynomial(3).unwrap();
        let targets = targets_from_density(&d, &t).unwrap();
        let a = solve_dual(&q, &t, &targets, &SolverConfig::default()).unwrap();
        let cfg = SolverConfig { scaling: false, ..SolverConfig::default() };
        let b = solve_dual(&q, &t, &targets, &cfg).unwrap();
        for (x, y) in a.probs.iter().zip(&b.probs) {
            assert!((x - y).abs() < 1e-10);
        }
        for (x, y) in a.dual.lambda.iter().zip(&b.dual.lambda) {
            assert!((x - y).abs() < 1e-6 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn infeasible_and_underdetermined_inputs() {
        let q = [1.0 / 3.0; 3];
        let err = solve_dual_table(&q, &table(&[0.0, 0.5, 1.0], 1), &[1.2], &SolverConfig::default()).unwrap_err();
        assert_eq!(err, Error::Infeasible { component: 0 });
        let err = solve_dual_table(&q, &table(&[0.0, 0.5, 1.0], 3), &[0.5, 0.3, 0.2], &SolverConfig::default()).unwrap_err();
        assert_eq!(err.kind_name(), "TooFewPoints");
        // zero-mass points do not count
        let err = solve_dual_table(&[0.0, 0.5, 0.5, 0.0], &table(&[0.0, 0.3, 0.6, 1.0], 2), &[0.4, 0.2], &SolverConfig::default())
            .unwrap_err();
        assert_eq!(err.kind_name(), "TooFewPoints");
    }

    #[test]
    fn outside_hull_inside_box_diverges() {
        // (0.5, 0.5) is inside the box [0,1]² but above the chord of x ↦ x² on {0, 0.5, 1}.
        let err = solve_dual_table(&[1.0 / 3.0; 3], &table(&[0.0, 0.5, 1.0], 2), &[0.5, 0.6], &SolverConfig::default())
            .unwrap_err();
        assert_eq!(err.kind_name(), "DivergedInfeasible");
    }

    #[test]
    fn dependent_components_are_singular() {
        let rows: Vec<Vec<f64>> = [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|&x| vec![x, 2.0 * x + 1.0]).collect();
        let t = MomentTable::from_rows(&rows).unwrap();
        let err = solve_dual_table(&[0.2; 5], &t, &[0.4, 1.8], &SolverConfig::default()).unwrap_err();
        assert_eq!(err, Error::SingularHessian);
    }

    #[test]
    fn boundary_targets_reach_limit() {
        // (0, 1) on {-1, 0, 1} is a vertex of conv T(D): only p = (1/2, 0, 1/2) matches.
        let set = symmetric_grid(1, 1.0).unwrap();
        let n = Density::<f64>::std_normal();
        let q = initial_discretization(&n, &set, &trapezoid_weights(&set).unwrap()).unwrap();
        let t = MomentDefiningFunction::polynomial(2).unwrap();
        let sol = solve_dual(&q, &t, &MomentTargets::user(vec![0.0, 1.0]), &SolverConfig::default()).unwrap();
        assert_eq!(sol.dual.termination, Termination::BoundaryLimit);
        assert!(sol.moment_residual <= 1e-8);
        assert!(sol.probs[1] < 1e-8);
        assert!((sol.probs[0] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn dimension_errors() {
        let t = table(&[0.0, 1.0], 1);
        assert!(dual_objective(&[0.5, 0.5], &t, &[0.5, 0.1], &[0.0]).is_err());
        assert!(dual_gradient(&[0.5], &t, &[0.5], &[0.0]).is_err());
        assert!(kl_divergence(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = SolverConfig { kappa: 0.0, ..SolverConfig::default() };
        let err = solve_dual_table(&[0.5, 0.5], &table(&[0.0, 1.0], 1), &[0.5], &cfg).unwrap_err();
        assert_eq!(err.kind_name(), "InvalidParams");
    }

    #[test]
    fn single_precision_solve() {
        let rows: Vec<Vec<f32>> = [0.0f32, 0.25, 0.5, 0.75, 1.0].iter().map(|&x| vec![x, x * x]).collect();
        let t = MomentTable::from_rows(&rows).unwrap();
        let cfg = SolverConfig::<f32> { stop_tol: 1e-5, grad_tol: 1e-4, residual_tol: 1e-4, ..SolverConfig::default() };
        let sol = solve_dual_table(&[0.2f32; 5], &t, &[0.45, 0.3], &cfg).unwrap();
        assert!(sol.moment_residual < 1e-4);
    }
}
