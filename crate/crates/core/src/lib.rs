//! Moment-exact discretization of continuous densities.
//!
//! Starting from a quadrature-based discretization `Q` of a density `f` on a finite grid,
//! the crate finds the distribution `P` on the same grid that matches prescribed
//! generalized moments exactly while staying closest to `Q` in Kullback–Leibler
//! divergence. The projection is computed through its unconstrained dual with a
//! regularized Newton iteration ([`maxent`]).
//!
//! Around the solver sit the pieces needed to use and evaluate it: densities with exact
//! moments and an adaptive quadrature oracle ([`density`], [`oracle`]), grids and
//! trapezoid/Simpson weights ([`grid`]), moment-defining functions ([`moments`]), error
//! measurement and Chebyshev residuals ([`diagnostics`]) and a CRRA portfolio
//! application ([`portfolio`]).
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the `*64` aliases
//! below fix the double-precision types used by the command-line front end.
//!
//! ```
//! use momentlock::{grid, maxent, moments, Density64, SolverConfig64};
//!
//! let f = Density64::beta(1.0, 3.0).unwrap();
//! let set = grid::uniform_grid(0.0, 1.0, 4).unwrap();
//! let rule = grid::trapezoid_weights(&set).unwrap();
//! let q = grid::initial_discretization(&f, &set, &rule).unwrap();
//! let t = moments::MomentDefiningFunction::polynomial(2).unwrap();
//! let targets = moments::targets_from_density(&f, &t).unwrap();
//! let sol = maxent::solve_dual(&q, &t, &targets, &SolverConfig64::default()).unwrap();
//! assert!(sol.moment_residual < 1e-8);
//! ```

pub mod density;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod maxent;
pub mod moments;
pub mod oracle;
pub mod portfolio;
pub mod scalar;

pub use density::{Density, MomentVector, Support};
pub use diagnostics::{ChebyshevFit, ErrorReport, TestFunction};
pub use error::{Error, Result};
pub use grid::{DiscreteSet, InitialDiscretization, QuadratureRule, RuleKind};
pub use maxent::{DualState, MaxEntSolution, SolverConfig, Termination};
pub use moments::{Feasibility, MomentDefiningFunction, MomentTable, MomentTargets};
pub use portfolio::{PortfolioProblem, PortfolioSolution};
pub use scalar::Scalar;

pub type Density64 = Density<f64>;
pub type DiscreteSet64 = DiscreteSet<f64>;
pub type QuadratureRule64 = QuadratureRule<f64>;
pub type InitialDiscretization64 = InitialDiscretization<f64>;
pub type MomentDefiningFunction64 = MomentDefiningFunction<f64>;
pub type MomentTargets64 = MomentTargets<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type MaxEntSolution64 = MaxEntSolution<f64>;
pub type ErrorReport64 = ErrorReport<f64>;
pub type ChebyshevFit64 = ChebyshevFit<f64>;
pub type PortfolioProblem64 = PortfolioProblem<f64>;
pub type PortfolioSolution64 = PortfolioSolution<f64>;

pub type Density32 = Density<f32>;
pub type SolverConfig32 = SolverConfig<f32>;
pub type MaxEntSolution32 = MaxEntSolution<f32>;
