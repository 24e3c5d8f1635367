//! Global solver and certificate checker for scalar QCQP problems.
//!
//! A *scalar* QCQP is a quadratically constrained quadratic program in which
//! every quadratic term is a scalar multiple of the squared norm:
//!
//! ```text
//! minimize    J(x)  = a_J ||x||^2 + 2 <b_J, x> + c_J
//! subject to  f_k(x) = a_k ||x||^2 + 2 <b_k, x> + c_k <= 0,   k = 1..m
//! ```
//!
//! over `x` in R^n. The objective and the constraints may be nonconvex
//! (negative curvature scalars are allowed). For this class, global optimality
//! of a feasible point is captured exactly by a KKT system with a scalar
//! curvature test, and the Lagrangian dual can be maximized to produce both
//! the optimal value and a verifiable certificate.
//!
//! The crate is organized around that pipeline:
//!
//! - [`model`]: problem data. Vectors, scalar quadratics, multipliers,
//!   certificates.
//! - [`kkt`]: residual-based verification of KKT and Fritz-John certificates,
//!   for scalar problems and for dense symmetric-matrix problems.
//! - [`dual`]: closed-form dual evaluation and the global solver (projected
//!   supergradient ascent with a coordinate polish), plus strictly feasible
//!   point search.
//! - [`gis`]: the image-set convexity witness. Given two points and a convex
//!   weight, constructs a third point whose value under every functional of a
//!   family equals the convex combination of the endpoint values.
//! - [`slemma`]: a theorem-of-the-alternative engine for families of scalar
//!   quadratics: either a point making all functionals strictly negative, or a
//!   nonnegative combination that is globally nonnegative.
//! - [`oracle`]: brute-force grid minimization used as independent ground
//!   truth in tests and from the CLI.
//!
//! All types are immutable values and every operation is a pure function, so
//! everything here is safe to share across threads.
//!
//! # Example
//!
//! Globally solve `minimize ||x - (2,0)||^2 subject to ||x||^2 <= 1`:
//!
//! ```
//! use sqcqp_core::dual::{solve, SolveConfig};
//! use sqcqp_core::{Problem, ScalarQuadratic, Vector, Verdict};
//!
//! let objective = ScalarQuadratic::new(1.0, Vector::from_slice(&[-2.0, 0.0])?, 4.0)?;
//! let ball = ScalarQuadratic::new(1.0, Vector::zeros(2), -1.0)?;
//! let problem = Problem::new(objective, vec![ball])?;
//!
//! let (multipliers, x, certificate) = solve(&problem, &SolveConfig::default())?;
//! assert_eq!(certificate.verdict, Verdict::GloballyOptimal);
//! assert!((x[0] - 1.0).abs() < 1e-5 && x[1].abs() < 1e-5);
//! assert!((multipliers.gamma()[0] - 1.0).abs() < 1e-5);
//! # Ok::<(), sqcqp_core::Error>(())
//! ```

pub mod dual;
pub mod gis;
pub mod kkt;
pub mod model;
pub mod oracle;
pub mod slemma;

mod linalg;
mod rng;
mod search;

pub use model::{
    Certificate, Multipliers, Problem, ScalarQuadratic, ToleranceSet, Vector, Verdict,
};
pub use search::SearchConfig;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("multiplier {index} is negative ({value})")]
    NegativeMultiplier { index: usize, value: f64 },
    #[error("all multipliers are zero")]
    AllZeroMultipliers,
    #[error("non-finite entry in {context}")]
    NonFiniteEntry { context: &'static str },
    #[error("plain multipliers expected, but gamma0 is present")]
    UnexpectedGamma0,
    #[error("fritz-john multipliers expected, but gamma0 is absent")]
    MissingGamma0,
    #[error("linear terms span the whole space (rank {rank} = dimension {dim}); no kernel direction exists")]
    FullRank { rank: usize, dim: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("grid of {size} points exceeds the limit of {limit}")]
    GridTooLarge { size: u128, limit: u128 },
    #[error("dual ascent diverged: {reason}")]
    DualDivergence { reason: String },
    #[error("no convergence: duality gap {gap:.3e} above tolerance (best value {best_value})")]
    NoConvergence { gap: f64, best_value: f64 },
    #[error("internal contradiction: {0}")]
    InternalContradiction(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
