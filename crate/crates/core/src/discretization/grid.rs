use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::C64;

/// Uniform grid on `[0, 1]` with trapezoidal quadrature weights.
///
/// Cloning is cheap; nodes and weights are shared.
#[derive(Debug, Clone)]
pub struct Grid {
    n: usize,
    h: f64,
    nodes: Arc<[f64]>,
    weights: Arc<[f64]>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        // A uniform grid on [0, 1] is determined by its node count.
        self.n == other.n
    }
}

impl Eq for Grid {}

/// Builds the uniform grid with `n` nodes, `omega_0 = 0` and `omega_{n-1} = 1`.
pub fn make_uniform_grid(n: usize) -> Result<Grid> {
    if n < 3 {
        return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {n}")));
    }
    let h = 1.0 / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { 1.0 } else { i as f64 * h })
        .collect();
    let weights: Vec<f64> = (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
        .collect();
    Ok(Grid {
        n,
        h,
        nodes: nodes.into(),
        weights: weights.into(),
    })
}

impl Grid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_vector(&self) -> DVector<f64> {
        DVector::from_row_slice(&self.weights)
    }

    /// Samples a complex-valued function at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> C64) -> GridFunction {
        let values = DVector::from_iterator(self.n, self.nodes.iter().map(|&w| f(w)));
        GridFunction {
            grid: self.clone(),
            values,
        }
    }

    /// Samples a real-valued function at the nodes.
    pub fn sample_real(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        self.sample(|w| C64::new(f(w), 0.0))
    }

    pub fn zeros(&self) -> GridFunction {
        GridFunction {
            grid: self.clone(),
            values: DVector::zeros(self.n),
        }
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: len,
            });
        }
        Ok(())
    }
}

/// Nodal values of a state on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: DVector<C64>,
}

impl GridFunction {
    pub fn new(grid: &Grid, values: DVector<C64>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn from_real(grid: &Grid, values: &[f64]) -> Result<Self> {
        Self::new(
            grid,
            DVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0))),
        )
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &DVector<C64> {
        &self.values
    }

    pub fn into_values(self) -> DVector<C64> {
        self.values
    }

    /// Value at the left endpoint `omega = 0`.
    pub fn left_value(&self) -> C64 {
        self.values[0]
    }

    /// Value at the right endpoint `omega = 1`.
    pub fn right_value(&self) -> C64 {
        self.values[self.values.len() - 1]
    }

    pub fn norm_l2(&self) -> f64 {
        inner_l2_unchecked(&self.grid, &self.values, &self.values).re.max(0.0).sqrt()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: &self.values * factor,
        }
    }

    /// `self - other`; fails when the grids differ.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: &self.values - &other.values,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: &self.values + &other.values,
        })
    }
}

pub(crate) fn same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a != b {
        return Err(Error::Dimension {
            expected: a.n(),
            found: b.n(),
        });
    }
    Ok(())
}

/// Weighted L² inner product `sum_i w_i f_i conj(g_i)`.
pub fn inner_l2(f: &GridFunction, g: &GridFunction) -> Result<C64> {
    same_grid(&f.grid, &g.grid)?;
    Ok(inner_l2_unchecked(&f.grid, &f.values, &g.values))
}

pub(crate) fn inner_l2_unchecked(grid: &Grid, f: &DVector<C64>, g: &DVector<C64>) -> C64 {
    grid.weights
        .iter()
        .zip(f.iter().zip(g.iter()))
        .map(|(&w, (fi, gi))| fi * gi.conj() * w)
        .sum()
}
