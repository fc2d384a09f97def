//! Discretized domains: grids, grid functions, weights and the discrete
//! Dirichlet Laplacian.

mod function;
mod grid;
mod operator;
mod weight;

pub use function::GridFunction;
pub use grid::Grid;
pub use operator::{
    assemble_laplacian, auxiliary_supersolution_field, refuge_operator, LinearOperator,
    DIRECT_SOLVE_CUTOFF,
};
pub use weight::{WeightField, WeightShape};
