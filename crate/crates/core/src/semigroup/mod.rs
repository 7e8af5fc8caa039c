//! Mild-solution propagation `x_u(t; x0) = S(t) x0 + ∫ S(t - s) B u(s) ds` and
//! the collocated output `y = B* x`.

mod mild;
mod propagator;
mod signal;

pub use mild::{boundary_trace, classical_check, mild_solution, output_signal, ClassicalReport, TraceReport};
pub use propagator::{propagate_matrix, propagate_shift, semigroup_matrix, StepPropagator};
pub use signal::{step_count, ControlSignal, OutputSignal, Trajectory};

