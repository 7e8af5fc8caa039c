use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{c, cholesky_lower, congruence_inverse, hermitian_part};
use crate::C64;

/// Relative clamping tolerance for eigenvalues that should be non-negative.
pub const SQRT_REL_TOL: f64 = 1e-10;

/// Non-negative square root of an operator that is self-adjoint in the inner
/// product `<x, y>_G = y^H G x`, kept in factored form.
///
/// With `G = L L^H` the operator is unitarily similar to the Hermitian matrix
/// `L^H X L^{-H}`; the root is taken there and mapped back.
#[derive(Debug, Clone)]
pub struct GramSqrt {
    /// Cholesky factor of the Gram matrix.
    pub(crate) chol: DMatrix<C64>,
    /// Hermitian root in the `L^H`-transformed coordinates.
    pub(crate) root_tilde: DMatrix<C64>,
    /// Clamped eigenvalues of the operator, ascending.
    pub eigenvalues: DVector<f64>,
}

impl GramSqrt {
    /// The root as an operator on the original coordinates: `L^{-H} S L^H`.
    pub fn operator(&self) -> Result<DMatrix<C64>> {
        let lh = self.chol.adjoint();
        let sl = &self.root_tilde * &lh;
        self.chol
            .adjoint()
            .solve_upper_triangular(&sl)
            .ok_or(Error::Singular("cholesky factor"))
    }

    /// `||S x||_G^2`, evaluated as `||S~ L^H x||^2`.
    pub fn apply_norm_sq(&self, x: &DVector<C64>) -> f64 {
        let y = &self.root_tilde * (self.chol.adjoint() * x);
        y.norm_squared()
    }
}

fn root_of_hermitian(h: DMatrix<C64>, tol: f64) -> Result<(DMatrix<C64>, DVector<f64>)> {
    let eig = SymmetricEigen::new(hermitian_part(&h));
    let mut vals = eig.eigenvalues.clone();
    let lowest = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if lowest < -tol {
        return Err(Error::NotPsd {
            eigenvalue: lowest,
            tol,
        });
    }
    vals.apply(|v| *v = v.max(0.0));
    let roots = vals.map(|v| c(v.sqrt()));
    let v = &eig.eigenvectors;
    let root = v * DMatrix::from_diagonal(&roots) * v.adjoint();
    let mut order: Vec<f64> = vals.iter().cloned().collect();
    order.sort_by(|a, b| a.total_cmp(b));
    Ok((hermitian_part(&root), DVector::from_vec(order)))
}

/// Square root of the operator `G^{-1} F` where `F` is a Hermitian form and `G`
/// is Hermitian positive definite. Avoids forming `G^{-1} F` explicitly.
///
/// `rel_tol` scales with the largest eigenvalue magnitude.
pub fn psd_sqrt_of_form(form: &DMatrix<C64>, gram: &DMatrix<C64>, rel_tol: f64) -> Result<GramSqrt> {
    let chol = cholesky_lower(gram)?;
    let tilde = hermitian_part(&congruence_inverse(&chol, &hermitian_part(form))?);
    let scale = spectral_radius_hermitian(&tilde);
    let (root_tilde, eigenvalues) = root_of_hermitian(tilde, rel_tol * scale)?;
    Ok(GramSqrt {
        chol,
        root_tilde,
        eigenvalues,
    })
}

/// Square root `S` of `matrix`, where `matrix` is self-adjoint and non-negative in
/// the `gram` inner product. `S` is self-adjoint non-negative in the same inner
/// product and `S * S = matrix`. Eigenvalues in `[-tol, 0)` are clamped to zero.
pub fn psd_sqrt(matrix: &DMatrix<C64>, gram: &DMatrix<C64>, tol: f64) -> Result<DMatrix<C64>> {
    let chol = cholesky_lower(gram)?;
    let lh = chol.adjoint();
    // L^H M L^{-H} = (L^{-1} (L^H M)^H)^H
    let lhm = &lh * matrix;
    let tilde = chol
        .solve_lower_triangular(&lhm.adjoint())
        .ok_or(Error::Singular("cholesky factor"))?
        .adjoint();
    let (root_tilde, eigenvalues) = root_of_hermitian(tilde, tol)?;
    GramSqrt {
        chol,
        root_tilde,
        eigenvalues,
    }
    .operator()
}

/// The default clamping tolerance `SQRT_REL_TOL * max |eigenvalue|` for `psd_sqrt`.
pub fn default_sqrt_tol(matrix: &DMatrix<C64>, gram: &DMatrix<C64>) -> Result<f64> {
    let chol = cholesky_lower(gram)?;
    let lhm = chol.adjoint() * matrix;
    let tilde = chol
        .solve_lower_triangular(&lhm.adjoint())
        .ok_or(Error::Singular("cholesky factor"))?
        .adjoint();
    Ok(SQRT_REL_TOL * spectral_radius_hermitian(&hermitian_part(&tilde)))
}

fn spectral_radius_hermitian(h: &DMatrix<C64>) -> f64 {
    SymmetricEigen::new(h.clone())
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}
