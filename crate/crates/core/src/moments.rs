//! Moment-defining functions `T = (T_1, …, T_L)` and their target values.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::density::{Density, DensityKind, MomentVector};
use crate::error::{Error, Result};
use crate::grid::DiscreteSet;
use crate::scalar::Scalar;

/// One named scalar component of a custom `T`.
#[derive(Clone)]
pub struct Component<S> {
    pub name: String,
    pub eval: Arc<dyn Fn(S) -> S + Send + Sync>,
}

impl<S> Component<S> {
    pub fn new(name: impl Into<String>, eval: impl Fn(S) -> S + Send + Sync + 'static) -> Self {
        Self { name: name.into(), eval: Arc::new(eval) }
    }
}

impl<S> fmt::Debug for Component<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Component").field(&self.name).finish()
    }
}

#[derive(Debug, Clone)]
pub enum MomentDefiningFunction<S> {
    /// `T_l(x) = x^l`, `l = 1..=degree`.
    Polynomial(usize),
    Custom(Vec<Component<S>>),
}

/// Serializable description of a [`MomentDefiningFunction`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MomentSpecRepr {
    Polynomial { degree: usize },
    Custom { components: Vec<String> },
}

impl<S: Scalar> MomentDefiningFunction<S> {
    pub fn polynomial(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidParams("polynomial moment degree must be >= 1".into()));
        }
        Ok(Self::Polynomial(degree))
    }

    pub fn custom(components: Vec<Component<S>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParams("custom moment function needs a component".into()));
        }
        Ok(Self::Custom(components))
    }

    /// Number of constraints `L`.
    pub fn len(&self) -> usize {
        match self {
            Self::Polynomial(d) => *d,
            Self::Custom(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn repr(&self) -> MomentSpecRepr {
        match self {
            Self::Polynomial(d) => MomentSpecRepr::Polynomial { degree: *d },
            Self::Custom(c) => MomentSpecRepr::Custom { components: c.iter().map(|c| c.name.clone()).collect() },
        }
    }

    /// Rebuilds from a description; custom names are looked up in `resolve`.
    pub fn from_repr(
        repr: &MomentSpecRepr,
        resolve: impl Fn(&str) -> Option<Component<S>>,
    ) -> Result<Self> {
        match repr {
            MomentSpecRepr::Polynomial { degree } => Self::polynomial(*degree),
            MomentSpecRepr::Custom { components } => {
                let comps = components
                    .iter()
                    .map(|n| resolve(n).ok_or_else(|| Error::InvalidParams(format!("unknown moment component '{n}'"))))
                    .collect::<Result<Vec<_>>>()?;
                Self::custom(comps)
            }
        }
    }

    /// Writes `T(x)` into `out` without validation.
    pub(crate) fn eval_into(&self, x: S, out: &mut [S]) {
        match self {
            Self::Polynomial(_) => {
                let mut pow = S::one();
                for o in out.iter_mut() {
                    pow = pow * x;
                    *o = pow;
                }
            }
            Self::Custom(c) => {
                for (o, comp) in out.iter_mut().zip(c) {
                    *o = (comp.eval)(x);
                }
            }
        }
    }

    /// `T(x)`; fails if a component is NaN or infinite.
    pub fn evaluate(&self, x: S) -> Result<MomentVector<S>> {
        let mut out = vec![S::zero(); self.len()];
        self.eval_into(x, &mut out);
        if let Some(component) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { component, x: x.as_f64() });
        }
        Ok(MomentVector(out))
    }

    /// `T` tabulated on every grid point.
    pub fn tabulate(&self, set: &DiscreteSet<S>) -> Result<MomentTable<S>> {
        let l = self.len();
        let mut values = Vec::with_capacity(set.len() * l);
        for &x in set.points() {
            values.extend(self.evaluate(x)?.0);
        }
        Ok(MomentTable { values, width: l })
    }
}

/// Row-major `I × L` table of `T(x_i)`. Works for points of any dimension, since the
/// solver only ever sees tabulated values.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable<S> {
    values: Vec<S>,
    width: usize,
}

impl<S: Scalar> MomentTable<S> {
    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if width == 0 {
            return Err(Error::InvalidParams("moment table needs at least one column".into()));
        }
        let mut values = Vec::with_capacity(rows.len() * width);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != width {
                return Err(Error::DimensionMismatch { expected: width, found: r.len() });
            }
            if let Some(component) = r.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue { component, x: i as f64 });
            }
            values.extend_from_slice(r);
        }
        Ok(Self { values, width })
    }

    pub fn rows(&self) -> usize {
        self.values.len() / self.width
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.values[i * self.width..(i + 1) * self.width]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetSource {
    Analytic,
    Oracle,
    User,
}

/// `T̄ = ∫ f T`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTargets<S> {
    pub values: MomentVector<S>,
    pub source: TargetSource,
}

impl<S: Scalar> MomentTargets<S> {
    pub fn user(values: Vec<S>) -> Self {
        Self { values: MomentVector(values), source: TargetSource::User }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        self.values.as_slice()
    }
}

/// Analytic moments for polynomial `T` on built-in families, oracle integration otherwise.
pub fn targets_from_density<S: Scalar>(
    density: &Density<S>,
    t: &MomentDefiningFunction<S>,
) -> Result<MomentTargets<S>> {
    let analytic = matches!(t, MomentDefiningFunction::Polynomial(_))
        && !matches!(density.kind(), DensityKind::Custom { .. });
    if analytic {
        let values = (1..=t.len())
            .map(|l| density.exact_polynomial_moment(l as u32))
            .collect::<Result<Vec<_>>>()?;
        return Ok(MomentTargets { values: MomentVector(values), source: TargetSource::Analytic });
    }
    let width = t.len();
    let values = (0..width)
        .map(|l| {
            density.expectation_oracle(|x| {
                let mut row = vec![S::zero(); width];
                t.eval_into(x, &mut row);
                row[l]
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentTargets { values: MomentVector(values), source: TargetSource::Oracle })
}

/// Outcome of the componentwise range check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    /// Every target lies strictly inside the range of its component. Necessary, not
    /// sufficient, for interiority to the convex hull.
    Feasible,
    /// Some target sits exactly on the boundary of its component's range.
    Unverified,
    /// Target `component` lies outside its component's range; no distribution matches it.
    Infeasible { component: usize },
}

/// Box check of `T̄` against `[min_i T_l(x_i), max_i T_l(x_i)]` over the rows in `table`.
pub fn feasibility_precheck_table<S: Scalar>(
    table: &MomentTable<S>,
    rows: impl Iterator<Item = usize> + Clone,
    targets: &[S],
) -> Feasibility {
    let mut verdict = Feasibility::Feasible;
    for (l, &target) in targets.iter().enumerate() {
        let (lo, hi) = rows
            .clone()
            .map(|i| table.row(i)[l])
            .fold((S::infinity(), S::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if target < lo || target > hi || !target.is_finite() {
            return Feasibility::Infeasible { component: l };
        }
        if target == lo || target == hi {
            verdict = Feasibility::Unverified;
        }
    }
    verdict
}

pub fn feasibility_precheck<S: Scalar>(
    t: &MomentDefiningFunction<S>,
    set: &DiscreteSet<S>,
    targets: &MomentTargets<S>,
) -> Result<Feasibility> {
    if targets.len() != t.len() {
        return Err(Error::DimensionMismatch { expected: t.len(), found: targets.len() });
    }
    let table = t.tabulate(set)?;
    Ok(feasibility_precheck_table(&table, 0..table.rows(), targets.as_slice()))
}
