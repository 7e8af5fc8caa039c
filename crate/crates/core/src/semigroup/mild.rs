use nalgebra::DVector;

use super::propagator::{aligned_shift, StepPropagator};
use super::signal::{ControlSignal, OutputSignal, Trajectory};
use crate::discretization::{same_grid, DiscreteSystem, GridFunction, ModelTag};
use crate::error::{Error, Result};
use crate::linalg::{c, scale_rows};
use crate::C64;

/// Mild solution `x(t) = S(t) x0 + ∫_0^t S(t - s) B u(s) ds` on the control's
/// time grid.
///
/// Steps `x_{k+1} = S(dt) x_k + dt/2 (S(dt) B u_k + B u_{k+1})`, which unrolls to
/// the trapezoidal rule for the convolution integral. With `u ≡ 0` this is pure
/// semigroup propagation.
pub fn mild_solution(sys: &DiscreteSystem, x0: &GridFunction, u: &ControlSignal) -> Result<Trajectory> {
    same_grid(sys.grid(), x0.grid())?;
    u.check_dim(sys)?;
    let dt = u.dt();
    let step = StepPropagator::new(sys, dt)?;
    let b = sys.b_matrix();
    let half = c(0.5 * dt);
    let forcing: Vec<DVector<C64>> = u.values().iter().map(|v| b * v).collect();
    let homogeneous = forcing.iter().all(|f| f.iter().all(|v| v.norm() == 0.0));

    let mut states = Vec::with_capacity(u.steps() + 1);
    let mut x = x0.values().clone();
    states.push(x0.clone());
    for k in 0..u.steps() {
        let next = if homogeneous {
            step.apply(&x)
        } else {
            step.apply(&(&x + &forcing[k] * half)) + &forcing[k + 1] * half
        };
        x = next;
        states.push(GridFunction::new(sys.grid(), x.clone())?);
    }
    Ok(Trajectory {
        dt,
        states,
        system_tag: sys.model(),
    })
}

/// `y(t_k) = B^H W x(t_k)`, the adjoint of `B` in the weighted inner product.
pub fn output_signal(sys: &DiscreteSystem, traj: &Trajectory) -> Result<OutputSignal> {
    let bw = scale_rows(sys.weights(), sys.b_matrix()).adjoint();
    let values = traj
        .states()
        .iter()
        .map(|x| {
            same_grid(sys.grid(), x.grid())?;
            Ok(&bw * x.values())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OutputSignal { dt: traj.dt(), values })
}

/// Result of [`classical_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalReport {
    pub classical: bool,
    /// Largest violation of the model's boundary conditions by `x0`.
    pub boundary_residual: f64,
    pub boundary_ok: bool,
    pub control_smooth: bool,
}

/// Whether `(x0, u)` generates a classical solution: `x0` satisfies the
/// model's boundary conditions and `u` comes from a continuously
/// differentiable preset.
pub fn classical_check(sys: &DiscreteSystem, x0: &GridFunction, u: &ControlSignal) -> ClassicalReport {
    let left = x0.left_value();
    let right = x0.right_value();
    let residual = match sys.model() {
        ModelTag::Transport => right.norm(),
        ModelTag::Heat => left.norm().max(right.norm()),
        ModelTag::SkewDamped => (left - right).norm(),
        ModelTag::Custom => 0.0,
    };
    let scale = x0.values().iter().fold(1.0f64, |m, v| m.max(v.norm()));
    let boundary_ok = residual <= 1e-8 * scale;
    let control_smooth = u.is_smooth();
    ClassicalReport {
        classical: boundary_ok && control_smooth,
        boundary_residual: residual,
        boundary_ok,
        control_smooth,
    }
}

/// The outflow trace `t ↦ x_u(t; x0)(0)` of the transport model, obtained by
/// reading node `ω = 0` of the mild solution and by evaluating
/// `χ(t) x0(t) + ∫_{max(t-1,0)}^t [B u(s)](t - s) ds` directly.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceReport {
    pub times: Vec<f64>,
    pub from_solution: Vec<C64>,
    pub from_formula: Vec<C64>,
    pub max_discrepancy: f64,
}

pub fn boundary_trace(sys: &DiscreteSystem, x0: &GridFunction, u: &ControlSignal) -> Result<TraceReport> {
    if sys.model() != ModelTag::Transport {
        return Err(Error::UnsupportedModel(sys.model().as_str()));
    }
    let traj = mild_solution(sys, x0, u)?;
    let from_solution: Vec<C64> = traj.states().iter().map(|x| x.left_value()).collect();

    // The formula is evaluated by indexing x0 and B u at ω = t - s, with the
    // time-grid trapezoidal rule in s. Values at ω = 1 lie outside the open
    // transport window and count as zero, matching χ on [0, 1).
    let cells = aligned_shift(u.dt(), sys.grid().h())?;
    let last = sys.grid().n() - 1;
    let b = sys.b_matrix();
    let forcing: Vec<DVector<C64>> = u.values().iter().map(|v| b * v).collect();
    let at = |v: &DVector<C64>, steps: usize| -> C64 {
        let node = steps * cells;
        if node < last {
            v[node]
        } else {
            C64::new(0.0, 0.0)
        }
    };
    let dt = u.dt();
    let from_formula: Vec<C64> = (0..=u.steps())
        .map(|k| {
            let free = at(x0.values(), k);
            let mut integral = C64::new(0.0, 0.0);
            for (l, f) in forcing.iter().enumerate().take(k + 1) {
                let w = if l == 0 || l == k { 0.5 } else { 1.0 };
                integral += at(f, k - l) * (w * dt);
            }
            if k == 0 {
                integral = C64::new(0.0, 0.0);
            }
            free + integral
        })
        .collect();
    let max_discrepancy = from_solution
        .iter()
        .zip(&from_formula)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(TraceReport {
        times: traj.times(),
        from_solution,
        from_formula,
        max_discrepancy,
    })
}
