use nalgebra::{DMatrix, DVector};

use crate::discretization::{psd_sqrt_of_form, same_grid, DiscreteSystem, GramSqrt, Grid, GridFunction, SQRT_REL_TOL};
use crate::error::{Error, Result};
use crate::linalg::{c, cholesky_lower, diag, hermitian_part, scale_rows, weighted_adjoint};
use crate::C64;

/// Hermitian matrix `F = -(W A + A^H W) / 2` of the real-part form, so that
/// `r[x, y] = y^H F x = -(<Ax, y> + <x, Ay>) / 2`.
pub fn form_matrix(sys: &DiscreteSystem) -> DMatrix<C64> {
    -hermitian_part(&scale_rows(sys.weights(), sys.a_matrix()))
}

/// `r[x, y] = -(<Ax, y> + <x, Ay>) / 2`.
pub fn form_r(sys: &DiscreteSystem, x: &GridFunction, y: &GridFunction) -> Result<C64> {
    same_grid(sys.grid(), x.grid())?;
    same_grid(sys.grid(), y.grid())?;
    let wa = scale_rows(sys.weights(), sys.a_matrix());
    let ax_y = y.values().dotc(&(&wa * x.values()));
    let x_ay = (&wa * y.values()).dotc(x.values());
    Ok((ax_y + x_ay) * c(-0.5))
}

/// Discrete realizations of the dissipation: the form `F`, the operator
/// `M = G^{-1} F` on the graph-norm space with its root, and the bounded
/// operator `Q = -((A - I)^{-1} + (A - I)^{-*}) / 2` with its root.
///
/// All adjoints are taken in the quadrature-weighted inner product.
#[derive(Debug, Clone)]
pub struct DissipationToolkit {
    grid: Grid,
    weights: DVector<f64>,
    a_minus_i: DMatrix<C64>,
    f_matrix: DMatrix<C64>,
    m_matrix: DMatrix<C64>,
    m_root: GramSqrt,
    m_sqrt: DMatrix<C64>,
    q_matrix: DMatrix<C64>,
    q_root: GramSqrt,
}

pub fn build_toolkit(sys: &DiscreteSystem) -> Result<DissipationToolkit> {
    let n = sys.grid().n();
    let f_matrix = form_matrix(sys);

    let g = sys.g_gram();
    let chol = cholesky_lower(g)?;
    let y = chol
        .solve_lower_triangular(&f_matrix)
        .ok_or(Error::Singular("graph gram"))?;
    let m_matrix = chol
        .adjoint()
        .solve_upper_triangular(&y)
        .ok_or(Error::Singular("graph gram"))?;
    let m_root = psd_sqrt_of_form(&f_matrix, g, SQRT_REL_TOL)?;
    let m_sqrt = m_root.operator()?;

    let a_minus_i = sys.a_matrix() - DMatrix::<C64>::identity(n, n);
    let resolvent = a_minus_i
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::Singular("A - I"))?;
    let w = sys.weights();
    let q_matrix = (&resolvent + weighted_adjoint(w, &resolvent)) * c(-0.5);
    let wq = hermitian_part(&scale_rows(w, &q_matrix));
    let q_root = psd_sqrt_of_form(&wq, &diag(w), SQRT_REL_TOL)?;

    Ok(DissipationToolkit {
        grid: sys.grid().clone(),
        weights: w.clone(),
        a_minus_i,
        f_matrix,
        m_matrix,
        m_root,
        m_sqrt,
        q_matrix,
        q_root,
    })
}

impl DissipationToolkit {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn f_matrix(&self) -> &DMatrix<C64> {
        &self.f_matrix
    }

    pub fn m_matrix(&self) -> &DMatrix<C64> {
        &self.m_matrix
    }

    /// `M^{1/2}`, self-adjoint and non-negative in the graph inner product.
    pub fn m_sqrt(&self) -> &DMatrix<C64> {
        &self.m_sqrt
    }

    /// Eigenvalues of `M`, ascending.
    pub fn m_eigenvalues(&self) -> &DVector<f64> {
        &self.m_root.eigenvalues
    }

    pub fn q_matrix(&self) -> &DMatrix<C64> {
        &self.q_matrix
    }

    /// Eigenvalues of `Q`, ascending.
    pub fn q_eigenvalues(&self) -> &DVector<f64> {
        &self.q_root.eigenvalues
    }

    pub fn q_sqrt(&self) -> Result<DMatrix<C64>> {
        self.q_root.operator()
    }

    /// `r[x] = x^H F x`.
    pub fn form_value(&self, x: &GridFunction) -> Result<f64> {
        same_grid(&self.grid, x.grid())?;
        Ok(x.values().dotc(&(&self.f_matrix * x.values())).re)
    }

    /// `M^{1/2} x`.
    pub fn apply_m_sqrt(&self, x: &GridFunction) -> Result<GridFunction> {
        same_grid(&self.grid, x.grid())?;
        GridFunction::new(&self.grid, &self.m_sqrt * x.values())
    }

    fn norm_sq(&self, x: &DVector<C64>) -> f64 {
        x.iter().zip(self.weights.iter()).map(|(v, w)| w * v.norm_sqr()).sum()
    }
}

/// `||M^{1/2} x||_A^2`, the dissipation rate expressed in the graph norm.
pub fn dissipation_rate(tk: &DissipationToolkit, x: &GridFunction) -> Result<f64> {
    same_grid(&tk.grid, x.grid())?;
    Ok(tk.m_root.apply_norm_sq(x.values()))
}

/// `| ||Q^{1/2} (A - I) x||^2 - ||x||^2 - r[x] |`.
pub fn q_identity_residual(tk: &DissipationToolkit, x: &GridFunction) -> Result<f64> {
    same_grid(&tk.grid, x.grid())?;
    let y = &tk.a_minus_i * x.values();
    let lhs = tk.q_root.apply_norm_sq(&y);
    let rhs = tk.norm_sq(x.values()) + tk.form_value(x)?;
    Ok((lhs - rhs).abs())
}
