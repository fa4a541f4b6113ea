//! Continuous densities on the real line and their ground-truth moments.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::{integrate, OracleConfig};
use crate::scalar::Scalar;

/// Standard-normal supports are cut here for numerical integration; the tail mass
/// beyond 12 standard deviations is below 1e-30.
pub const NORMAL_TRUNCATION: f64 = 12.0;

/// Where a density lives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support<S> {
    Interval { lo: S, hi: S },
    RealLine,
}

impl<S: Scalar> Support<S> {
    pub fn contains(&self, x: S) -> bool {
        match *self {
            Support::Interval { lo, hi } => x >= lo && x <= hi,
            Support::RealLine => x.is_finite(),
        }
    }

    /// Finite interval used for integration and sup-norm sampling.
    pub fn working_interval(&self) -> (S, S) {
        match *self {
            Support::Interval { lo, hi } => (lo, hi),
            Support::RealLine => (-S::lit(NORMAL_TRUNCATION), S::lit(NORMAL_TRUNCATION)),
        }
    }
}

/// Evaluation callback of a user-supplied density.
pub type DensityFn<S> = Arc<dyn Fn(S) -> S + Send + Sync>;

#[derive(Clone)]
pub enum DensityKind<S> {
    Uniform,
    Beta { a: S, b: S, ln_beta: S },
    StdNormal,
    Custom { name: String, pdf: DensityFn<S> },
}

impl<S: fmt::Debug> fmt::Debug for DensityKind<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityKind::Uniform => write!(f, "Uniform"),
            DensityKind::Beta { a, b, .. } => write!(f, "Beta({a:?}, {b:?})"),
            DensityKind::StdNormal => write!(f, "StdNormal"),
            DensityKind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// A probability density `f` with its support. Immutable once built.
#[derive(Debug, Clone)]
pub struct Density<S> {
    kind: DensityKind<S>,
    support: Support<S>,
}

impl<S: Scalar> Density<S> {
    pub fn uniform(lo: S, hi: S) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParams(format!("uniform needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { kind: DensityKind::Uniform, support: Support::Interval { lo, hi } })
    }

    pub fn unit_uniform() -> Self {
        Self::uniform(S::zero(), S::one()).expect("[0, 1] is a valid interval")
    }

    pub fn beta(a: S, b: S) -> Result<Self> {
        if !(a > S::zero() && b > S::zero() && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParams(format!("beta needs a, b > 0, got ({a}, {b})")));
        }
        let ln_beta = S::lit(statrs::function::beta::ln_beta(a.as_f64(), b.as_f64()));
        Ok(Self {
            kind: DensityKind::Beta { a, b, ln_beta },
            support: Support::Interval { lo: S::zero(), hi: S::one() },
        })
    }

    pub fn std_normal() -> Self {
        Self { kind: DensityKind::StdNormal, support: Support::RealLine }
    }

    /// Wraps an evaluation callback. The callback is trusted to be a normalized density
    /// on `support`; values outside the support are forced to zero.
    pub fn custom(
        name: impl Into<String>,
        support: Support<S>,
        pdf: impl Fn(S) -> S + Send + Sync + 'static,
    ) -> Result<Self> {
        if let Support::Interval { lo, hi } = support {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidParams(format!("custom support [{lo}, {hi}] is empty")));
            }
        }
        Ok(Self {
            kind: DensityKind::Custom { name: name.into(), pdf: Arc::new(pdf) },
            support,
        })
    }

    pub fn kind(&self) -> &DensityKind<S> {
        &self.kind
    }

    pub fn support(&self) -> Support<S> {
        self.support
    }

    /// Short identifier, e.g. `beta:1,3`.
    pub fn label(&self) -> String {
        match (&self.kind, self.support) {
            (DensityKind::Uniform, Support::Interval { lo, hi }) => format!("uniform:{lo},{hi}"),
            (DensityKind::Beta { a, b, .. }, _) => format!("beta:{a},{b}"),
            (DensityKind::StdNormal, _) => "std_normal".to_string(),
            (DensityKind::Custom { name, .. }, _) => name.clone(),
            (DensityKind::Uniform, Support::RealLine) => unreachable!("uniform has finite support"),
        }
    }

    /// `f(x)`, zero outside the support.
    pub fn pdf(&self, x: S) -> S {
        if !self.support.contains(x) {
            return S::zero();
        }
        match &self.kind {
            DensityKind::Uniform => match self.support {
                Support::Interval { lo, hi } => S::one() / (hi - lo),
                Support::RealLine => S::zero(),
            },
            DensityKind::Beta { a, b, ln_beta } => {
                let one = S::one();
                // x^(a-1) (1-x)^(b-1) / B(a, b); powf(0, 0) = 1 handles a = 1 or b = 1.
                let num = x.powf(*a - one) * (one - x).powf(*b - one);
                num * (-*ln_beta).exp()
            }
            DensityKind::StdNormal => {
                (-(x * x) / S::lit(2.0)).exp() / (S::lit(2.0) * S::PI()).sqrt()
            }
            DensityKind::Custom { pdf, .. } => pdf(x).max(S::zero()),
        }
    }

    /// Closed-form `E[X^l]` for the built-in families.
    pub fn exact_polynomial_moment(&self, l: u32) -> Result<S> {
        if l == 0 {
            return Err(Error::InvalidParams("moment order must be at least 1".into()));
        }
        match (&self.kind, self.support) {
            (DensityKind::Uniform, Support::Interval { lo, hi }) => {
                let k = S::count(l as usize + 1);
                Ok((hi.powi(l as i32 + 1) - lo.powi(l as i32 + 1)) / (k * (hi - lo)))
            }
            (DensityKind::Beta { a, b, .. }, _) => Ok((0..l).fold(S::one(), |acc, j| {
                let j = S::count(j as usize);
                acc * (*a + j) / (*a + *b + j)
            })),
            (DensityKind::StdNormal, _) => {
                if l % 2 == 1 {
                    Ok(S::zero())
                } else {
                    // (l - 1)!!
                    Ok((1..l).step_by(2).fold(S::one(), |acc, k| acc * S::count(k as usize)))
                }
            }
            _ => Err(Error::Unsupported(format!(
                "no closed-form moments for {}; use the expectation oracle",
                self.label()
            ))),
        }
    }

    /// `∫ f g` by adaptive quadrature over the (truncated) support.
    pub fn expectation_oracle(&self, g: impl Fn(S) -> S) -> Result<S> {
        self.expectation_oracle_with(g, &OracleConfig::default())
    }

    pub fn expectation_oracle_with(&self, g: impl Fn(S) -> S, cfg: &OracleConfig<S>) -> Result<S> {
        let (lo, hi) = self.support.working_interval();
        if let Support::RealLine = self.support {
            // Split at the origin so the bell is resolved from both sides.
            let left = integrate(|x| self.pdf(x) * g(x), lo, S::zero(), cfg)?;
            let right = integrate(|x| self.pdf(x) * g(x), S::zero(), hi, cfg)?;
            return Ok(left + right);
        }
        integrate(|x| self.pdf(x) * g(x), lo, hi, cfg)
    }
}

/// Vector of `L` generalized moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector<S>(pub Vec<S>);

impl<S: Scalar> MomentVector<S> {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }
}
