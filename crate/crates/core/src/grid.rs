//! Discrete point sets and the positive-weight quadrature rules that seed the
//! initial discretization.

use crate::density::{Density, Support};
use crate::error::{Error, Result};
use crate::scalar::{ordered_sum, Scalar};

/// Consecutive gaps may differ by this relative amount and still count as uniform.
const UNIFORM_GAP_RTOL: f64 = 1e-12;

/// Ordered grid `x_1 < … < x_I` with the refinement index `M` it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSet<S> {
    points: Vec<S>,
    index: usize,
}

impl<S: Scalar> DiscreteSet<S> {
    /// Validates strict ordering and `I >= 2`.
    pub fn new(points: Vec<S>, index: usize) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {}", points.len())));
        }
        if let Some(i) = points.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid(format!("point {i} is not finite")));
        }
        if let Some(i) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!("points {i} and {} not strictly increasing", i + 1)));
        }
        Ok(Self { points, index })
    }

    pub fn points(&self) -> &[S] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The refinement index `M`.
    pub fn index(&self) -> usize {
        self.index
    }

    /// Common spacing, or `NonUniformGrid` naming the first offending gap.
    pub fn uniform_spacing(&self) -> Result<S> {
        let h = self.points[1] - self.points[0];
        let tol = S::lit(UNIFORM_GAP_RTOL) * h.abs();
        for (i, w) in self.points.windows(2).enumerate() {
            if ((w[1] - w[0]) - h).abs() > tol {
                return Err(Error::NonUniformGrid { index: i });
            }
        }
        Ok(h)
    }
}

/// `2M + 1` equally spaced points covering `[c, d]`, endpoints included.
pub fn uniform_grid<S: Scalar>(c: S, d: S, m: usize) -> Result<DiscreteSet<S>> {
    if !(c < d) || m == 0 {
        return Err(Error::InvalidGrid(format!("uniform grid needs c < d and M >= 1 (c={c}, d={d}, M={m})")));
    }
    let n = 2 * m;
    let h = (d - c) / S::count(n);
    let mut points: Vec<S> = (0..=n).map(|i| c + S::count(i) * h).collect();
    points[n] = d;
    DiscreteSet::new(points, m)
}

/// `{m h : m = 0, ±1, …, ±M}`.
pub fn symmetric_grid<S: Scalar>(m: usize, h: S) -> Result<DiscreteSet<S>> {
    if m == 0 || !(h > S::zero()) || !h.is_finite() {
        return Err(Error::InvalidGrid(format!("symmetric grid needs M >= 1 and h > 0 (M={m}, h={h})")));
    }
    let mi = m as i64;
    let points = (-mi..=mi).map(|k| S::lit(k as f64) * h).collect();
    DiscreteSet::new(points, m)
}

/// Grid used by the experiments for a given density: the uniform `2M + 1` grid on a
/// bounded support, or the symmetric grid with `h = 1/sqrt(M)` on the real line.
pub fn default_grid<S: Scalar>(density: &Density<S>, m: usize) -> Result<DiscreteSet<S>> {
    match density.support() {
        Support::Interval { lo, hi } => uniform_grid(lo, hi, m),
        Support::RealLine => symmetric_grid(m, S::one() / S::count(m).sqrt()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Trapezoid,
    Simpson,
    Custom,
}

impl RuleKind {
    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Trapezoid => "trapezoid",
            RuleKind::Simpson => "simpson",
            RuleKind::Custom => "custom",
        }
    }
}

impl std::str::FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trapezoid" | "trapezoidal" | "trap" => Ok(RuleKind::Trapezoid),
            "simpson" | "simp" => Ok(RuleKind::Simpson),
            other => Err(Error::InvalidParams(format!("unknown quadrature rule '{other}'"))),
        }
    }
}

/// Nonnegative weights `w_i` aligned with a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<S> {
    weights: Vec<S>,
    kind: RuleKind,
}

impl<S: Scalar> QuadratureRule<S> {
    /// User-supplied weights. Negative weights are rejected.
    pub fn custom(weights: Vec<S>) -> Result<Self> {
        if let Some((index, w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= S::zero())) {
            return Err(Error::NegativeWeight { index, value: w.as_f64() });
        }
        Ok(Self { weights, kind: RuleKind::Custom })
    }

    pub fn build(kind: RuleKind, set: &DiscreteSet<S>) -> Result<Self> {
        match kind {
            RuleKind::Trapezoid => trapezoid_weights(set),
            RuleKind::Simpson => simpson_weights(set),
            RuleKind::Custom => Err(Error::InvalidParams("custom rules need explicit weights".into())),
        }
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    /// `Σ w_i f(x_i) g(x_i)`.
    pub fn apply(&self, set: &DiscreteSet<S>, fg: impl Fn(S) -> S) -> S {
        ordered_sum(self.weights.iter().zip(set.points()).map(|(&w, &x)| w * fg(x)))
    }
}

/// `h/2` at both endpoints and `h` elsewhere.
pub fn trapezoid_weights<S: Scalar>(set: &DiscreteSet<S>) -> Result<QuadratureRule<S>> {
    let h = set.uniform_spacing()?;
    let n = set.len();
    let half = h / S::lit(2.0);
    let weights = (0..n).map(|i| if i == 0 || i == n - 1 { half } else { h }).collect();
    Ok(QuadratureRule { weights, kind: RuleKind::Trapezoid })
}

/// Composite Simpson: `h/3` at the endpoints, then alternating `4h/3`, `2h/3`.
/// Needs an odd number of points.
pub fn simpson_weights<S: Scalar>(set: &DiscreteSet<S>) -> Result<QuadratureRule<S>> {
    let h = set.uniform_spacing()?;
    let n = set.len();
    if n % 2 == 0 {
        return Err(Error::EvenPointCount(n));
    }
    let third = h / S::lit(3.0);
    let weights = (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                third
            } else if i % 2 == 1 {
                // 1-based even index
                S::lit(4.0) * third
            } else {
                S::lit(2.0) * third
            }
        })
        .collect();
    Ok(QuadratureRule { weights, kind: RuleKind::Simpson })
}

/// The reference distribution `Q`: `q_i ∝ w_i f(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDiscretization<S> {
    set: DiscreteSet<S>,
    probs: Vec<S>,
}

impl<S: Scalar> InitialDiscretization<S> {
    /// Wraps explicit probabilities. They must be nonnegative with positive total; they
    /// are renormalized to sum to one.
    pub fn from_probs(set: DiscreteSet<S>, probs: Vec<S>) -> Result<Self> {
        if probs.len() != set.len() {
            return Err(Error::DimensionMismatch { expected: set.len(), found: probs.len() });
        }
        if let Some((index, p)) = probs.iter().enumerate().find(|(_, p)| !(**p >= S::zero() && p.is_finite())) {
            return Err(Error::NegativeWeight { index, value: p.as_f64() });
        }
        let total = ordered_sum(probs.iter().copied());
        if !(total > S::zero()) {
            return Err(Error::DegenerateDiscretization);
        }
        let probs = probs.into_iter().map(|p| p / total).collect();
        Ok(Self { set, probs })
    }

    pub fn set(&self) -> &DiscreteSet<S> {
        &self.set
    }

    pub fn points(&self) -> &[S] {
        self.set.points()
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    /// Number of points carrying positive mass.
    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&q| q > S::zero()).count()
    }

    /// `Σ q_i g(x_i)`.
    pub fn expectation(&self, g: impl Fn(S) -> S) -> S {
        ordered_sum(self.probs.iter().zip(self.set.points()).map(|(&q, &x)| q * g(x)))
    }
}

/// Builds `Q` from a density, grid and rule. Zero-density points keep `q_i = 0`.
pub fn initial_discretization<S: Scalar>(
    density: &Density<S>,
    set: &DiscreteSet<S>,
    rule: &QuadratureRule<S>,
) -> Result<InitialDiscretization<S>> {
    if rule.weights().len() != set.len() {
        return Err(Error::DimensionMismatch { expected: set.len(), found: rule.weights().len() });
    }
    let raw: Vec<S> = rule
        .weights()
        .iter()
        .zip(set.points())
        .map(|(&w, &x)| w * density.pdf(x))
        .collect();
    if !raw.iter().any(|&v| v > S::zero()) {
        return Err(Error::DegenerateDiscretization);
    }
    InitialDiscretization::from_probs(set.clone(), raw)
}
