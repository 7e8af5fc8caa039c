use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::grid::{same_grid, Grid, GridFunction};
use crate::error::{Error, Result};
use crate::linalg::{c, cholesky_lower, diag, hermitian_part, max_hermitian_eigenvalue, scale_rows, spectral_norm};
use crate::C64;

/// Relative slack allowed for rounding when checking discrete dissipativity.
pub const DISSIPATIVITY_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelTag {
    Transport,
    Heat,
    SkewDamped,
    Custom,
}

impl ModelTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelTag::Transport => "transport",
            ModelTag::Heat => "heat",
            ModelTag::SkewDamped => "skew_damped",
            ModelTag::Custom => "custom",
        }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transport" => Ok(ModelTag::Transport),
            "heat" => Ok(ModelTag::Heat),
            "skew_damped" => Ok(ModelTag::SkewDamped),
            "custom" => Ok(ModelTag::Custom),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }
}

/// Which semigroup realization propagates this system exactly or cheaply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagatorHint {
    /// Nodal left shift with zero inflow (transport on an aligned time grid).
    Shift,
    /// Eigendecomposition; requires `A` self-adjoint in the weighted inner product.
    Eigen,
    /// Dense matrix exponential.
    Generic,
}

/// A linear system `x' = A x + B u`, `y = B* x` on nodal values of a [`Grid`].
///
/// Immutable after construction. Invariants checked on construction: the
/// Hermitian part of `W A` is negative semi-definite up to rounding, the graph
/// Gram matrix is positive definite and `B` has one row per node.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    grid: Grid,
    a: DMatrix<C64>,
    b: DMatrix<C64>,
    weights: DVector<f64>,
    g_gram: DMatrix<C64>,
    model: ModelTag,
    hint: PropagatorHint,
}

impl DiscreteSystem {
    /// Validates and wraps user-provided matrices.
    pub fn custom(grid: &Grid, a: DMatrix<C64>, b: DMatrix<C64>, hint: PropagatorHint) -> Result<Self> {
        Self::build(grid, a, b, ModelTag::Custom, hint)
    }

    fn build(grid: &Grid, a: DMatrix<C64>, b: DMatrix<C64>, model: ModelTag, hint: PropagatorHint) -> Result<Self> {
        let n = grid.n();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                found: if a.nrows() != n { a.nrows() } else { a.ncols() },
            });
        }
        if b.nrows() != n {
            return Err(Error::Dimension {
                expected: n,
                found: b.nrows(),
            });
        }
        let weights = grid.weight_vector();
        let wa = scale_rows(&weights, &a);
        let top = max_hermitian_eigenvalue(&wa);
        let tol = DISSIPATIVITY_REL_TOL * a.norm().max(1.0);
        if top > tol {
            return Err(Error::NotDissipative(top));
        }
        if hint == PropagatorHint::Eigen {
            let skew = &wa - wa.adjoint();
            if skew.norm() > 1e-12 * wa.norm().max(1.0) {
                return Err(Error::InvalidParameter {
                    name: "propagator_hint",
                    reason: "eigen propagation needs A self-adjoint in the weighted inner product".into(),
                });
            }
        }
        let g_gram = hermitian_part(&(diag(&weights) + a.adjoint() * &wa));
        cholesky_lower(&g_gram)?;
        Ok(Self {
            grid: grid.clone(),
            a,
            b,
            weights,
            g_gram,
            model,
            hint,
        })
    }

    /// Replaces the input operator; `b` must have one row per grid node.
    pub fn with_input(self, b: DMatrix<C64>) -> Result<Self> {
        if b.nrows() != self.grid.n() {
            return Err(Error::Dimension {
                expected: self.grid.n(),
                found: b.nrows(),
            });
        }
        Ok(Self { b, ..self })
    }

    /// Replaces `B` by a single input injected with the given spatial profile.
    pub fn with_input_profile(self, profile: impl Fn(f64) -> f64) -> Result<Self> {
        let b = profile_column(&self.grid, profile);
        self.with_input(b)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn a_matrix(&self) -> &DMatrix<C64> {
        &self.a
    }

    pub fn b_matrix(&self) -> &DMatrix<C64> {
        &self.b
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// Diagonal L² Gram matrix.
    pub fn w_gram(&self) -> DMatrix<C64> {
        diag(&self.weights)
    }

    /// Graph Gram matrix `W + A^H W A`.
    pub fn g_gram(&self) -> &DMatrix<C64> {
        &self.g_gram
    }

    pub fn model(&self) -> ModelTag {
        self.model
    }

    pub fn propagator_hint(&self) -> PropagatorHint {
        self.hint
    }

    pub fn apply(&self, x: &GridFunction) -> Result<GridFunction> {
        same_grid(&self.grid, x.grid())?;
        GridFunction::new(&self.grid, &self.a * x.values())
    }

    /// `||B||` from `C^m` (Euclidean) into the weighted state space.
    pub fn b_norm(&self) -> f64 {
        let sqrt_w = self.weights.map(f64::sqrt);
        spectral_norm(&scale_rows(&sqrt_w, &self.b))
    }
}

fn profile_column(grid: &Grid, profile: impl Fn(f64) -> f64) -> DMatrix<C64> {
    DMatrix::from_iterator(grid.n(), 1, grid.nodes().iter().map(|&w| c(profile(w))))
}

/// `g^H G f = <f, g> + <A f, A g>`.
pub fn graph_inner(sys: &DiscreteSystem, f: &GridFunction, g: &GridFunction) -> Result<C64> {
    same_grid(sys.grid(), f.grid())?;
    same_grid(sys.grid(), g.grid())?;
    Ok(g.values().dotc(&(sys.g_gram() * f.values())))
}

/// Summation-by-parts first-derivative form `Q` (the derivative is `W^{-1} Q`)
/// for the trapezoidal norm: central in the interior, one-sided at the ends, and
/// `Q + Q^T = diag(-1, 0, ..., 0, 1)`.
fn sbp_form(n: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(n, n);
    for i in 0..n {
        if i > 0 {
            q[(i, i - 1)] = -0.5;
        }
        if i + 1 < n {
            q[(i, i + 1)] = 0.5;
        }
    }
    q[(0, 0)] = -0.5;
    q[(n - 1, n - 1)] = 0.5;
    q
}

fn divide_by_weights(weights: &DVector<f64>, q: DMatrix<f64>) -> DMatrix<C64> {
    let mut a = q.map(c);
    for (i, mut row) in a.row_iter_mut().enumerate() {
        row /= c(weights[i]);
    }
    a
}

/// Transport `A x = x'` with inflow condition `x(1) = 0`.
///
/// Central summation-by-parts derivative with the inflow condition imposed by an
/// upwind penalty at `omega = 1`. The resulting form is
/// `r[x] = |x_0|^2 / 2 + |x_{n-1}|^2 / 2`, which matches `|x(0)|^2 / 2` on
/// states satisfying the boundary condition and agrees exactly with the energy
/// lost by the zero-inflow nodal shift.
pub fn assemble_transport(grid: &Grid) -> Result<DiscreteSystem> {
    let n = grid.n();
    let weights = grid.weight_vector();
    let mut q = sbp_form(n);
    q[(n - 1, n - 1)] -= 1.0;
    let a = divide_by_weights(&weights, q);
    DiscreteSystem::build(grid, a, profile_column(grid, |_| 1.0), ModelTag::Transport, PropagatorHint::Shift)
}

/// Heat operator `A x = x''` with homogeneous Dirichlet conditions.
///
/// Interior rows use the three-point stencil with zero ghost values at the
/// boundary nodes; the boundary nodes relax to zero at rate `2 / h^2`, so `W A`
/// is real symmetric.
pub fn assemble_heat(grid: &Grid) -> Result<DiscreteSystem> {
    let n = grid.n();
    let h2 = grid.h() * grid.h();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 1..n - 1 {
        a[(i, i)] = -2.0 / h2;
        if i > 1 {
            a[(i, i - 1)] = 1.0 / h2;
        }
        if i + 2 < n {
            a[(i, i + 1)] = 1.0 / h2;
        }
    }
    a[(0, 0)] = -2.0 / h2;
    a[(n - 1, n - 1)] = -2.0 / h2;
    DiscreteSystem::build(grid, a.map(c), profile_column(grid, |_| 1.0), ModelTag::Heat, PropagatorHint::Eigen)
}

/// `A = J - damping * I` with `J` a periodic first derivative that is
/// skew-adjoint in the weighted inner product, so `r[x] = damping * ||x||^2`.
pub fn assemble_skew_damped(grid: &Grid, damping: f64) -> Result<DiscreteSystem> {
    if !(damping >= 0.0 && damping.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "damping",
            reason: format!("must be finite and non-negative, got {damping}"),
        });
    }
    let n = grid.n();
    let weights = grid.weight_vector();
    let mut k = sbp_form(n);
    // Periodic closure: cancel the boundary terms of Q + Q^T and couple the two
    // ends skew-symmetrically.
    k[(0, 0)] += 0.5;
    k[(n - 1, n - 1)] -= 0.5;
    k[(0, n - 1)] -= 0.5;
    k[(n - 1, 0)] += 0.5;
    let mut a = divide_by_weights(&weights, k);
    for i in 0..n {
        a[(i, i)] -= c(damping);
    }
    DiscreteSystem::build(grid, a, profile_column(grid, |_| 1.0), ModelTag::SkewDamped, PropagatorHint::Generic)
}

/// Assembles one of the built-in models; `damping` is used by `SkewDamped` only.
pub fn assemble(model: ModelTag, grid: &Grid, damping: f64) -> Result<DiscreteSystem> {
    match model {
        ModelTag::Transport => assemble_transport(grid),
        ModelTag::Heat => assemble_heat(grid),
        ModelTag::SkewDamped => assemble_skew_damped(grid, damping),
        ModelTag::Custom => Err(Error::UnsupportedModel("custom")),
    }
}
