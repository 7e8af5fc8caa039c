//! Dense helpers shared by the discretization, semigroup and dissipation modules.
//!
//! Every state space here is `C^n` with the diagonal quadrature inner product
//! `<x, y>_W = y^H W x`, so adjoints are `W^{-1} X^H W` rather than plain transposes.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::C64;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub(crate) fn diag(w: &DVector<f64>) -> DMatrix<C64> {
    DMatrix::from_diagonal(&w.map(c))
}

/// `(X + X^H) / 2`.
pub(crate) fn hermitian_part(x: &DMatrix<C64>) -> DMatrix<C64> {
    (x + x.adjoint()) * c(0.5)
}

/// `W X` for diagonal `W`.
pub(crate) fn scale_rows(w: &DVector<f64>, x: &DMatrix<C64>) -> DMatrix<C64> {
    let mut out = x.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= c(w[i]);
    }
    out
}

/// `X W` for diagonal `W`.
pub(crate) fn scale_cols(x: &DMatrix<C64>, w: &DVector<f64>) -> DMatrix<C64> {
    let mut out = x.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= c(w[j]);
    }
    out
}

/// Adjoint of `X : (C^n, W) -> (C^n, W)`, i.e. `W^{-1} X^H W`.
pub(crate) fn weighted_adjoint(w: &DVector<f64>, x: &DMatrix<C64>) -> DMatrix<C64> {
    let winv = w.map(|v| 1.0 / v);
    scale_cols(&scale_rows(&winv, &x.adjoint()), w)
}

/// Largest eigenvalue of a Hermitian matrix.
pub(crate) fn max_hermitian_eigenvalue(x: &DMatrix<C64>) -> f64 {
    SymmetricEigen::new(hermitian_part(x))
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Induced 2-norm of a (not necessarily square) matrix.
pub(crate) fn spectral_norm(x: &DMatrix<C64>) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Cholesky factor `L` with `G = L L^H`.
pub(crate) fn cholesky_lower(gram: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let g = hermitian_part(gram);
    let l = g.cholesky().map(|ch| ch.l()).ok_or(Error::NotPositiveDefinite)?;
    // The complex square root never fails, so a negative pivot shows up as an
    // imaginary diagonal entry instead of an error.
    let ok = l
        .diagonal()
        .iter()
        .all(|d| d.re > 0.0 && d.im.abs() <= 1e-12 * d.re && d.re.is_finite());
    if !ok {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(l)
}

/// `L^{-1} X L^{-H}` via two triangular solves.
pub(crate) fn congruence_inverse(l: &DMatrix<C64>, x: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let y = l
        .solve_lower_triangular(x)
        .ok_or(Error::Singular("cholesky factor"))?;
    let z = l
        .solve_lower_triangular(&y.adjoint())
        .ok_or(Error::Singular("cholesky factor"))?;
    Ok(z.adjoint())
}
