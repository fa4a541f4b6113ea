use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("quadrature oracle did not converge: error estimate {estimate:e} after {subdivisions} subdivisions")]
    NoConvergence { estimate: f64, subdivisions: usize },

    #[error("grid is not uniformly spaced (gap {index} deviates)")]
    NonUniformGrid { index: usize },

    #[error("Simpson's rule needs an odd number of points, got {0}")]
    EvenPointCount(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("negative quadrature weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("all products w_i f(x_i) vanish; no initial discretization exists")]
    DegenerateDiscretization,

    #[error("moment component {component} is not finite at x = {x}")]
    NonFiniteValue { component: usize, x: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{points} support points cannot carry {constraints} constraints (need at least L+1)")]
    TooFewPoints { points: usize, constraints: usize },

    #[error("moment target {component} lies outside the range of T on the grid")]
    Infeasible { component: usize },

    #[error("dual iteration diverged after {iterations} iterations (|lambda| = {lambda_norm:e}, residual {residual:e}); targets are not interior to conv T(D)")]
    DivergedInfeasible { iterations: usize, lambda_norm: f64, residual: f64 },

    #[error("Newton system is numerically singular; moment components are affinely dependent")]
    SingularHessian,

    #[error("p has mass at index {index} where q vanishes")]
    AbsoluteContinuityViolated { index: usize },

    #[error("portfolio return is non-positive at atom {index}")]
    DomainViolation { index: usize },

    #[error("Taylor approximation denominator is not positive")]
    DegenerateDenominator,

    #[error("no interior optimum: {0}")]
    NoInteriorOptimum(String),
}

impl Error {
    /// Variant name, used by front ends that report the error type.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::Unsupported(_) => "Unsupported",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NonUniformGrid { .. } => "NonUniformGrid",
            Error::EvenPointCount(_) => "EvenPointCount",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::NegativeWeight { .. } => "NegativeWeight",
            Error::DegenerateDiscretization => "DegenerateDiscretization",
            Error::NonFiniteValue { .. } => "NonFiniteValue",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::TooFewPoints { .. } => "TooFewPoints",
            Error::Infeasible { .. } => "Infeasible",
            Error::DivergedInfeasible { .. } => "DivergedInfeasible",
            Error::SingularHessian => "SingularHessian",
            Error::AbsoluteContinuityViolated { .. } => "AbsoluteContinuityViolated",
            Error::DomainViolation { .. } => "DomainViolation",
            Error::DegenerateDenominator => "DegenerateDenominator",
            Error::NoInteriorOptimum(_) => "NoInteriorOptimum",
        }
    }

    /// True when the error means the moment targets cannot be matched on the grid.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::TooFewPoints { .. } | Error::Infeasible { .. } | Error::DivergedInfeasible { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
