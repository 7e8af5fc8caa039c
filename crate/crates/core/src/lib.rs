//! Discretized linear port-Hamiltonian systems `x' = A x + B u`, `y = B* x` on
//! `L²(0, 1)`: mild-solution propagation, energy-balance auditing and three
//! representations of the dissipation rate (the real-part form, the graph-norm
//! operator `M` and the bounded operator `Q`), plus closability diagnostics.

pub mod discretization;
pub mod dissipation;
pub mod error;
mod linalg;
pub mod presets;
pub mod semigroup;

pub use error::{Error, Result};

/// Scalar type of all states and operators.
pub type C64 = num_complex::Complex<f64>;
