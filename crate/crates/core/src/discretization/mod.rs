//! Spatial grids, quadrature inner products, built-in model operators and
//! Gram-weighted square roots.

mod grid;
mod sqrt;
mod system;

pub use grid::{inner_l2, make_uniform_grid, Grid, GridFunction};
pub use sqrt::{default_sqrt_tol, psd_sqrt, psd_sqrt_of_form, GramSqrt, SQRT_REL_TOL};
pub use system::{
    assemble, assemble_heat, assemble_skew_damped, assemble_transport, graph_inner, DiscreteSystem, ModelTag,
    PropagatorHint, DISSIPATIVITY_REL_TOL,
};

pub(crate) use grid::same_grid;
