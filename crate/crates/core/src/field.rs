//! Cell-valued field containers.
//!
//! A field stores `cell_count * components` reals, row-major over cells with
//! the component index fastest. Component layouts per shape:
//!
//! | shape       | components    | index of entry                   |
//! |-------------|---------------|----------------------------------|
//! | scalar      | 1             | `0`                              |
//! | vector      | dim           | `i`                              |
//! | tensor      | dim*dim       | `i*dim + j`                      |
//! | order       | m             | `α`                              |
//! | order-grad  | m*dim         | `α*dim + i`  (∂_i ν^α)           |
//! | order-hess  | m*dim*dim     | `(α*dim + j)*dim + i` (∂_i ∂_j ν^α) |
//!
//! Fields are immutable once built; every operator returns a new field.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Per-cell component structure of a field.
pub trait Shape: Copy + PartialEq + fmt::Debug + Send + Sync {
    fn components(&self, dim: usize) -> usize;
    fn name(&self) -> &'static str;
    /// Order-parameter chart dimension, when the shape carries one.
    fn order_dim(&self) -> Option<usize> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scalar;
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vector;
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tensor;
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Order(pub usize);
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderGrad(pub usize);
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderHess(pub usize);

impl Shape for Scalar {
    fn components(&self, _dim: usize) -> usize {
        1
    }
    fn name(&self) -> &'static str {
        "scalar"
    }
}

impl Shape for Vector {
    fn components(&self, dim: usize) -> usize {
        dim
    }
    fn name(&self) -> &'static str {
        "vector"
    }
}

impl Shape for Tensor {
    fn components(&self, dim: usize) -> usize {
        dim * dim
    }
    fn name(&self) -> &'static str {
        "tensor"
    }
}

impl Shape for Order {
    fn components(&self, _dim: usize) -> usize {
        self.0
    }
    fn name(&self) -> &'static str {
        "order"
    }
    fn order_dim(&self) -> Option<usize> {
        Some(self.0)
    }
}

impl Shape for OrderGrad {
    fn components(&self, dim: usize) -> usize {
        self.0 * dim
    }
    fn name(&self) -> &'static str {
        "order-grad"
    }
    fn order_dim(&self) -> Option<usize> {
        Some(self.0)
    }
}

impl Shape for OrderHess {
    fn components(&self, dim: usize) -> usize {
        self.0 * dim * dim
    }
    fn name(&self) -> &'static str {
        "order-hess"
    }
    fn order_dim(&self) -> Option<usize> {
        Some(self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field<S: Shape> {
    grid: Grid,
    shape: S,
    values: Vec<f64>,
}

pub type ScalarField = Field<Scalar>;
pub type VectorField = Field<Vector>;
pub type TensorField = Field<Tensor>;
pub type OrderField = Field<Order>;
pub type OrderGradField = Field<OrderGrad>;
pub type OrderHessField = Field<OrderHess>;

/// L² (cell-volume weighted) and L∞ norms of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub linf: f64,
}

impl<S: Shape> Field<S> {
    /// Builds a field from raw values, checking length and finiteness.
    pub fn from_vec(grid: Grid, shape: S, values: Vec<f64>) -> Result<Self> {
        let nc = shape.components(grid.dim());
        let expected = grid.cell_count() * nc;
        if values.len() != expected {
            return Err(Error::Length {
                what: format!("{} field", shape.name()),
                expected,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: format!("{} field", shape.name()),
                cell: pos / nc,
                component: pos % nc,
            });
        }
        Ok(Field {
            grid,
            shape,
            values,
        })
    }

    /// Samples a closure at every cell. The closure receives the cell
    /// coordinates and writes the cell's components.
    pub fn from_fn<F>(grid: Grid, shape: S, f: F) -> Result<Self>
    where
        F: Fn([f64; 3], &mut [f64]) + Sync,
    {
        let nc = shape.components(grid.dim());
        let mut values = vec![0.0; grid.cell_count() * nc];
        values
            .par_chunks_mut(nc)
            .enumerate()
            .for_each(|(cell, out)| f(grid.coords(cell), out));
        Field::from_vec(grid, shape, values)
    }

    pub fn zeros(grid: Grid, shape: S) -> Self {
        let n = grid.cell_count() * shape.components(grid.dim());
        Field {
            grid,
            shape,
            values: vec![0.0; n],
        }
    }

    /// Same value pattern in every cell.
    pub fn uniform(grid: Grid, shape: S, cell_value: &[f64]) -> Result<Self> {
        let nc = shape.components(grid.dim());
        if cell_value.len() != nc {
            return Err(Error::Length {
                what: format!("{} cell value", shape.name()),
                expected: nc,
                found: cell_value.len(),
            });
        }
        let values = cell_value
            .iter()
            .cloned()
            .cycle()
            .take(nc * grid.cell_count())
            .collect();
        Field::from_vec(grid, shape, values)
    }

    /// Internal constructor for operator outputs; the caller guarantees the
    /// length. Finiteness is not rechecked.
    pub(crate) fn from_raw(grid: Grid, shape: S, values: Vec<f64>) -> Self {
        debug_assert_eq!(
            values.len(),
            grid.cell_count() * shape.components(grid.dim())
        );
        Field {
            grid,
            shape,
            values,
        }
    }

    /// Per-cell construction from a closure of the cell index.
    pub(crate) fn build<F>(grid: Grid, shape: S, f: F) -> Self
    where
        F: Fn(usize, &mut [f64]) + Sync,
    {
        let nc = shape.components(grid.dim());
        let mut values = vec![0.0; grid.cell_count() * nc];
        values
            .par_chunks_mut(nc)
            .enumerate()
            .for_each(|(cell, out)| f(cell, out));
        Field {
            grid,
            shape,
            values,
        }
    }

    /// Like `build`, then rejects non-finite output with its cell.
    pub(crate) fn try_build<F>(grid: Grid, shape: S, what: &str, f: F) -> Result<Self>
    where
        F: Fn(usize, &mut [f64]) + Sync,
    {
        let out = Field::build(grid, shape, f);
        out.check_finite(what)?;
        Ok(out)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn shape(&self) -> S {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn components(&self) -> usize {
        self.shape.components(self.grid.dim())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Components of one cell.
    pub fn at(&self, cell: usize) -> &[f64] {
        let nc = self.components();
        &self.values[cell * nc..(cell + 1) * nc]
    }

    /// Checks that every value is finite, reporting the first offending cell.
    pub fn check_finite(&self, what: &str) -> Result<()> {
        let nc = self.components();
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(pos) => Err(Error::NonFinite {
                what: what.to_string(),
                cell: pos / nc,
                component: pos % nc,
            }),
        }
    }

    /// Applies `f` to every value.
    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Self {
        let values = self.values.par_iter().map(|&v| f(v)).collect();
        Field::from_raw(self.grid, self.shape, values)
    }

    /// Elementwise combination of two fields of the same shape.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        if self.shape != other.shape {
            return Err(Error::Schema(format!(
                "shape {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        let values = self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Field::from_raw(self.grid, self.shape, values))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// Multiplies every component of each cell by the scalar value there.
    pub fn mul_scalar(&self, s: &ScalarField) -> Result<Self> {
        self.grid.check_same(&s.grid)?;
        Ok(Field::build(self.grid, self.shape, |cell, out| {
            let f = s.values[cell];
            for (o, v) in out.iter_mut().zip(self.at(cell)) {
                *o = f * v;
            }
        }))
    }

    /// Pointwise Euclidean norm of each cell's components.
    pub fn magnitude(&self) -> ScalarField {
        Field::build(self.grid, Scalar, |cell, out| {
            out[0] = self.at(cell).iter().map(|v| v * v).sum::<f64>().sqrt();
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norms(&self) -> Norms {
        self.norms_where(|_| true)
    }

    /// Norms restricted to the cells selected by `keep`.
    pub fn norms_where(&self, keep: impl Fn(usize) -> bool) -> Norms {
        let nc = self.components();
        let vol = self.grid.cell_volume();
        let mut sq = 0.0;
        let mut linf: f64 = 0.0;
        for cell in 0..self.grid.cell_count() {
            if !keep(cell) {
                continue;
            }
            for v in &self.values[cell * nc..(cell + 1) * nc] {
                sq += v * v;
                linf = linf.max(v.abs());
            }
        }
        Norms {
            l2: (sq * vol).sqrt(),
            linf,
        }
    }

    /// Norms over cells at least `margin` away from one-sided boundaries.
    pub fn interior_norms(&self, margin: f64) -> Norms {
        let g = self.grid;
        self.norms_where(|c| g.is_interior(c, margin))
    }
}

impl ScalarField {
    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        Field::uniform(grid, Scalar, &[value])
    }

    /// Scalar field from a closure of the coordinates.
    pub fn sample(grid: Grid, f: impl Fn([f64; 3]) -> f64 + Sync) -> Result<Self> {
        Field::from_fn(grid, Scalar, |x, out| out[0] = f(x))
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

impl VectorField {
    /// Vector field from a closure returning the first `dim` components.
    pub fn sample(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3] + Sync) -> Result<Self> {
        let d = grid.dim();
        Field::from_fn(grid, Vector, |x, out| out.copy_from_slice(&f(x)[..d]))
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &VectorField) -> Result<ScalarField> {
        self.grid.check_same(&other.grid)?;
        Ok(Field::build(self.grid, Scalar, |cell, out| {
            out[0] = self
                .at(cell)
                .iter()
                .zip(other.at(cell))
                .map(|(a, b)| a * b)
                .sum();
        }))
    }
}

impl OrderField {
    pub fn m(&self) -> usize {
        self.shape.0
    }

    /// Order field from a closure writing the `m` chart components.
    pub fn sample(grid: Grid, m: usize, f: impl Fn([f64; 3], &mut [f64]) + Sync) -> Result<Self> {
        Field::from_fn(grid, Order(m), f)
    }

    /// Checks the unit-sphere constraint `|ν| = 1` within `tol` per cell.
    pub fn check_unit(&self, tol: f64) -> Result<()> {
        for cell in 0..self.grid.cell_count() {
            let n2: f64 = self.at(cell).iter().map(|v| v * v).sum();
            if (n2.sqrt() - 1.0).abs() > tol {
                return Err(Error::InvalidState(format!(
                    "order parameter leaves the unit sphere at cell {cell}: |ν| = {}",
                    n2.sqrt()
                )));
            }
        }
        Ok(())
    }
}

impl OrderGradField {
    pub fn m(&self) -> usize {
        self.shape.0
    }
}

impl OrderHessField {
    pub fn m(&self) -> usize {
        self.shape.0
    }
}

/// Lamb vector ω × v. In 2-D the vorticity is the out-of-plane scalar and the
/// result is the in-plane vector (−ω v_y, ω v_x).
pub fn lamb_vector_2d(omega: &ScalarField, v: &VectorField) -> Result<VectorField> {
    omega.grid.check_same(&v.grid)?;
    if v.dim() != 2 {
        return Err(Error::DimMismatch {
            expected: 2,
            found: v.dim(),
        });
    }
    Ok(Field::build(v.grid, Vector, |cell, out| {
        let w = omega.values[cell];
        let u = v.at(cell);
        out[0] = -w * u[1];
        out[1] = w * u[0];
    }))
}

/// Lamb vector ω × v for 3-D fields.
pub fn lamb_vector_3d(omega: &VectorField, v: &VectorField) -> Result<VectorField> {
    omega.grid.check_same(&v.grid)?;
    if v.dim() != 3 {
        return Err(Error::DimMismatch {
            expected: 3,
            found: v.dim(),
        });
    }
    Ok(Field::build(v.grid, Vector, |cell, out| {
        let w = omega.at(cell);
        let u = v.at(cell);
        out[0] = w[1] * u[2] - w[2] * u[1];
        out[1] = w[2] * u[0] - w[0] * u[2];
        out[2] = w[0] * u[1] - w[1] * u[0];
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length_and_non_finite() {
        let g = Grid::periodic(2, 4).unwrap();
        assert!(matches!(
            Field::from_vec(g, Vector, vec![0.0; 31]),
            Err(Error::Length { expected: 32, .. })
        ));
        let mut v = vec![0.0; 16];
        v[5] = f64::NAN;
        assert!(matches!(
            Field::from_vec(g, Scalar, v),
            Err(Error::NonFinite { cell: 5, .. })
        ));
    }

    #[test]
    fn component_layout_is_cell_major() {
        let g = Grid::periodic(2, 4).unwrap();
        let f = VectorField::sample(g, |x| [x[0], 10.0 + x[1], 0.0]).unwrap();
        let h = g.spacing()[0];
        let cell = g.linear_index([1, 2, 0]);
        assert_eq!(f.at(cell), &[h, 10.0 + 2.0 * h]);
    }

    #[test]
    fn lamb_vector_of_rigid_rotation() {
        let g = Grid::periodic(2, 4).unwrap();
        let v = VectorField::uniform(g, Vector, &[1.0, 0.0]).unwrap();
        let w = ScalarField::constant(g, 2.0).unwrap();
        let l = lamb_vector_2d(&w, &v).unwrap();
        assert_eq!(l.at(3), &[0.0, 2.0]);
    }
}
