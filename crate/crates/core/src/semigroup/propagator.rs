use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::discretization::{same_grid, DiscreteSystem, Grid, GridFunction, PropagatorHint};
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_part, scale_cols, scale_rows};
use crate::C64;

/// Number of grid cells covered by `t`, or an alignment error.
pub(crate) fn aligned_shift(t: f64, h: f64) -> Result<usize> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidTime(t));
    }
    let k = (t / h).round();
    if (k * h - t).abs() > 1e-9 * h.max(t) {
        return Err(Error::Alignment { t, h });
    }
    Ok(k as usize)
}

/// Shift nodal values `k` cells to the left with zero inflow. The value at the
/// inflow node `ω = 1` is never transported: it is a single point of the domain
/// where states of `dom A` vanish.
pub(crate) fn shift_nodes(values: &DVector<C64>, k: usize) -> DVector<C64> {
    if k == 0 {
        return values.clone();
    }
    let n = values.len();
    DVector::from_fn(n, |j, _| {
        if j + k < n - 1 {
            values[j + k]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Exact transport semigroup `[S(t)x](ω) = x(t + ω)` on an aligned grid.
pub fn propagate_shift(x0: &GridFunction, t: f64, grid: &Grid) -> Result<GridFunction> {
    same_grid(grid, x0.grid())?;
    let k = aligned_shift(t, grid.h())?;
    GridFunction::new(grid, shift_nodes(x0.values(), k))
}

/// Spectral data of a weighted self-adjoint generator: `W^{1/2} A W^{-1/2} = V Λ V^H`.
#[derive(Debug, Clone)]
pub(crate) struct WeightedEigen {
    sqrt_w: DVector<f64>,
    eigenvalues: DVector<f64>,
    vectors: DMatrix<C64>,
}

impl WeightedEigen {
    pub(crate) fn new(sys: &DiscreteSystem) -> Self {
        let sqrt_w = sys.weights().map(f64::sqrt);
        let inv = sqrt_w.map(|v| 1.0 / v);
        let sym = hermitian_part(&scale_cols(&scale_rows(&sqrt_w, sys.a_matrix()), &inv));
        let eig = SymmetricEigen::new(sym);
        Self {
            sqrt_w,
            eigenvalues: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    pub(crate) fn exp(&self, t: f64) -> DMatrix<C64> {
        let e = self.eigenvalues.map(|l| c((l * t).exp()));
        let inner = &self.vectors * DMatrix::from_diagonal(&e) * self.vectors.adjoint();
        let inv = self.sqrt_w.map(|v| 1.0 / v);
        scale_cols(&scale_rows(&inv, &inner), &self.sqrt_w)
    }
}

/// Dense realization of `S(t) = exp(t A)` following the system's hint
/// (eigendecomposition for `Eigen`, Padé scaling and squaring otherwise).
pub fn semigroup_matrix(sys: &DiscreteSystem, t: f64) -> Result<DMatrix<C64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidTime(t));
    }
    if t == 0.0 {
        let n = sys.grid().n();
        return Ok(DMatrix::identity(n, n));
    }
    Ok(match sys.propagator_hint() {
        PropagatorHint::Eigen => WeightedEigen::new(sys).exp(t),
        PropagatorHint::Shift | PropagatorHint::Generic => (sys.a_matrix() * c(t)).exp(),
    })
}

/// `exp(t A) x0`.
pub fn propagate_matrix(sys: &DiscreteSystem, x0: &GridFunction, t: f64) -> Result<GridFunction> {
    same_grid(sys.grid(), x0.grid())?;
    if t == 0.0 {
        return Ok(x0.clone());
    }
    let s = semigroup_matrix(sys, t)?;
    GridFunction::new(sys.grid(), s * x0.values())
}

/// `S(dt)` for a fixed step, in whichever form the system prefers.
#[derive(Debug, Clone)]
pub enum StepPropagator {
    Shift(usize),
    Matrix(DMatrix<C64>),
}

impl StepPropagator {
    pub fn new(sys: &DiscreteSystem, dt: f64) -> Result<Self> {
        match sys.propagator_hint() {
            PropagatorHint::Shift => Ok(StepPropagator::Shift(aligned_shift(dt, sys.grid().h())?)),
            _ => Ok(StepPropagator::Matrix(semigroup_matrix(sys, dt)?)),
        }
    }

    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        match self {
            StepPropagator::Shift(k) => shift_nodes(x, *k),
            StepPropagator::Matrix(m) => m * x,
        }
    }
}
