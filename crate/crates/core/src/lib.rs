//! Numerical laboratory for positive steady states of a quasilinear
//! logistic equation, studied through its semilinear dual: the scalar
//! change of variables and its calculus, finite-difference Dirichlet
//! Laplacians, principal eigenvalues, nonlinear solves with branch
//! continuation, radial boundary blow-up solutions, and the parameter
//! sweeps that exercise the limiting regimes.

pub mod domain;
pub mod eigen;
pub mod error;
pub mod large;
pub mod linalg;
pub mod stationary;
pub mod sweeps;
pub mod transform;

pub use domain::{
    assemble_laplacian, auxiliary_supersolution_field, refuge_operator, Grid, GridFunction,
    LinearOperator, WeightField, WeightShape, DIRECT_SOLVE_CUTOFF,
};
pub use eigen::{discrete_lambda1_interval, principal_eigen, refuge_eigenvalue, EigenResult, RefugeEigen};
pub use error::{Error, Result};
pub use large::{
    compact_bound_check, keller_osserman_margin, minimal_large_solution, solve_dirichlet_ball,
    CompactBoundReport, KellerOsserman, LargeSolution, RadialProfile,
};
pub use stationary::{solve_logistic, Branch, BranchPoint, SolverConfig, StationaryProblem};
pub use sweeps::{kappa_to_zero, lambda_limits, Compact, SweepReport, SweepRow};
pub use transform::{DualTransform, KAPPA_ZERO};
