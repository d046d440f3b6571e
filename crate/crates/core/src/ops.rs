//! Discrete differential operators on structured grids.
//!
//! Every derivative is the second-order central difference
//! `(f[i+1] - f[i-1]) / 2h`. At a one-sided boundary the end cells use the
//! second-order stencils `(-3 f0 + 4 f1 - f2) / 2h` and
//! `(3 f[n-1] - 4 f[n-2] + f[n-3]) / 2h`. Second and higher derivatives are
//! compositions of the first-derivative operator.
//!
//! Index conventions: `grad` appends the differentiation axis as the last
//! component index, so `(grad u)_{ij} = ∂_j u_i`. `div` contracts the last
//! component index, so `(div T)_i = ∂_j T_{ij}`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{
    Field, Order, OrderField, OrderGrad, OrderGradField, OrderHess, OrderHessField, Scalar,
    ScalarField, Shape, Tensor, TensorField, Vector, VectorField,
};
use crate::grid::{Boundary, Grid};

/// Shapes that can be differentiated; the gradient appends one spatial index.
pub trait Differentiable: Shape {
    type Grad: Shape;
    fn grad_shape(&self) -> Self::Grad;
}

/// Shapes whose last index is spatial and can be contracted by `div`.
pub trait Contractible: Shape {
    type Div: Shape;
    fn div_shape(&self) -> Self::Div;
}

impl Differentiable for Scalar {
    type Grad = Vector;
    fn grad_shape(&self) -> Vector {
        Vector
    }
}

impl Differentiable for Vector {
    type Grad = Tensor;
    fn grad_shape(&self) -> Tensor {
        Tensor
    }
}

impl Differentiable for Order {
    type Grad = OrderGrad;
    fn grad_shape(&self) -> OrderGrad {
        OrderGrad(self.0)
    }
}

impl Differentiable for OrderGrad {
    type Grad = OrderHess;
    fn grad_shape(&self) -> OrderHess {
        OrderHess(self.0)
    }
}

impl Contractible for Vector {
    type Div = Scalar;
    fn div_shape(&self) -> Scalar {
        Scalar
    }
}

impl Contractible for Tensor {
    type Div = Vector;
    fn div_shape(&self) -> Vector {
        Vector
    }
}

impl Contractible for OrderGrad {
    type Div = Order;
    fn div_shape(&self) -> Order {
        Order(self.0)
    }
}

/// Derivative of every component along `axis`, same layout as the input.
pub(crate) fn derivative(grid: &Grid, values: &[f64], nc: usize, axis: usize) -> Vec<f64> {
    let n = grid.extents()[axis];
    let stride = grid.stride(axis);
    let inv2h = 0.5 / grid.spacing()[axis];
    let periodic = grid.boundary()[axis] == Boundary::Periodic;
    let mut out = vec![0.0; values.len()];
    out.par_chunks_mut(nc).enumerate().for_each(|(cell, o)| {
        let i = (cell / stride) % n;
        let base = cell - i * stride;
        let at = |k: usize, c: usize| values[(base + k * stride) * nc + c];
        for (c, oc) in o.iter_mut().enumerate() {
            *oc = if periodic {
                (at((i + 1) % n, c) - at((i + n - 1) % n, c)) * inv2h
            } else if i == 0 {
                (-3.0 * at(0, c) + 4.0 * at(1, c) - at(2, c)) * inv2h
            } else if i == n - 1 {
                (3.0 * at(n - 1, c) - 4.0 * at(n - 2, c) + at(n - 3, c)) * inv2h
            } else {
                (at(i + 1, c) - at(i - 1, c)) * inv2h
            };
        }
    });
    out
}

/// Gradient of any differentiable field; output component `c*dim + j` holds
/// `∂_j f_c`.
pub fn grad<S: Differentiable>(f: &Field<S>) -> Field<S::Grad> {
    let grid = *f.grid();
    let dim = grid.dim();
    let nc = f.components();
    let partials: Vec<Vec<f64>> = (0..dim)
        .map(|a| derivative(&grid, f.values(), nc, a))
        .collect();
    Field::build(grid, f.shape().grad_shape(), |cell, out| {
        for c in 0..nc {
            for (j, d) in partials.iter().enumerate() {
                out[c * dim + j] = d[cell * nc + c];
            }
        }
    })
}

/// Divergence over the last (spatial) index: `out_c = Σ_j ∂_j f_{c j}`.
pub fn div<S: Contractible>(f: &Field<S>) -> Field<S::Div> {
    let grid = *f.grid();
    let dim = grid.dim();
    let nc = f.components();
    let groups = nc / dim;
    let partials: Vec<Vec<f64>> = (0..dim)
        .map(|a| derivative(&grid, f.values(), nc, a))
        .collect();
    Field::build(grid, f.shape().div_shape(), |cell, out| {
        for (g, o) in out.iter_mut().enumerate().take(groups) {
            let mut s = 0.0;
            for (j, d) in partials.iter().enumerate() {
                s += d[cell * nc + g * dim + j];
            }
            *o = s;
        }
    })
}

pub fn grad_scalar(f: &ScalarField) -> VectorField {
    grad(f)
}

pub fn div_vector(u: &VectorField) -> ScalarField {
    div(u)
}

/// Jacobian `(grad u)_{ij} = ∂_j u_i`.
pub fn grad_vector(u: &VectorField) -> TensorField {
    grad(u)
}

/// `(div T)_i = ∂_j T_{ij}`, contracting the last index.
pub fn div_tensor(t: &TensorField) -> VectorField {
    div(t)
}

/// `(grad ν)^α_i = ∂_i ν^α`.
pub fn order_grad(nu: &OrderField) -> OrderGradField {
    grad(nu)
}

/// `(gradgrad ν)^α_{ji} = ∂_i ∂_j ν^α`.
pub fn order_second_grad(nu: &OrderField) -> OrderHessField {
    grad(&grad(nu))
}

/// `(div P)_α = ∂_j P_α^j`.
pub fn order_div(p: &OrderGradField) -> OrderField {
    div(p)
}

/// Result of a curl: the out-of-plane scalar in 2-D, a vector in 3-D.
#[derive(Debug, Clone, PartialEq)]
pub enum Curl {
    Planar(ScalarField),
    Spatial(VectorField),
}

pub fn curl_vector(u: &VectorField) -> Curl {
    match u.dim() {
        2 => Curl::Planar(curl_2d(u).expect("dim checked")),
        _ => Curl::Spatial(curl_3d(u).expect("dim checked")),
    }
}

/// Out-of-plane vorticity `∂_x u_y − ∂_y u_x` of a planar field.
pub fn curl_2d(u: &VectorField) -> Result<ScalarField> {
    if u.dim() != 2 {
        return Err(Error::DimMismatch {
            expected: 2,
            found: u.dim(),
        });
    }
    let grid = *u.grid();
    let dx = derivative(&grid, u.values(), 2, 0);
    let dy = derivative(&grid, u.values(), 2, 1);
    Ok(Field::build(grid, Scalar, |cell, out| {
        out[0] = dx[2 * cell + 1] - dy[2 * cell];
    }))
}

pub fn curl_3d(u: &VectorField) -> Result<VectorField> {
    if u.dim() != 3 {
        return Err(Error::DimMismatch {
            expected: 3,
            found: u.dim(),
        });
    }
    let grid = *u.grid();
    let d: Vec<Vec<f64>> = (0..3)
        .map(|a| derivative(&grid, u.values(), 3, a))
        .collect();
    Ok(Field::build(grid, Vector, |cell, out| {
        let p = |axis: usize, comp: usize| d[axis][3 * cell + comp];
        out[0] = p(1, 2) - p(2, 1);
        out[1] = p(2, 0) - p(0, 2);
        out[2] = p(0, 1) - p(1, 0);
    }))
}

/// Steady material derivative `(v·grad) f`, applied to each component.
pub fn advect_steady<S: Shape>(f: &Field<S>, v: &VectorField) -> Result<Field<S>> {
    f.grid().check_same(v.grid())?;
    let grid = *f.grid();
    let nc = f.components();
    let partials: Vec<Vec<f64>> = (0..grid.dim())
        .map(|a| derivative(&grid, f.values(), nc, a))
        .collect();
    Ok(Field::build(grid, f.shape(), |cell, out| {
        let vel = v.at(cell);
        for (c, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for (j, d) in partials.iter().enumerate() {
                s += vel[j] * d[cell * nc + c];
            }
            *o = s;
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;

    fn mixed_grid() -> Grid {
        let h = 1.0;
        Grid::new(&[6, 5], &[h, h], &[Boundary::OneSided, Boundary::Periodic]).unwrap()
    }

    #[test]
    fn constant_scalar_has_zero_gradient() {
        let g = Grid::periodic(2, 8).unwrap();
        let f = ScalarField::constant(g, 5.0).unwrap();
        assert_eq!(grad_scalar(&f).max_abs(), 0.0);
    }

    #[test]
    fn linear_in_x_with_one_sided_x() {
        let g = mixed_grid();
        let f = ScalarField::sample(g, |x| x[0]).unwrap();
        let gf = grad_scalar(&f);
        for cell in 0..g.cell_count() {
            assert!((gf.at(cell)[0] - 1.0).abs() < 1e-12);
            assert!(gf.at(cell)[1].abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_of_position_is_three() {
        let g = Grid::new(&[5, 6, 7], &[0.5, 0.25, 1.0], &[Boundary::OneSided; 3]).unwrap();
        let u = VectorField::sample(g, |x| x).unwrap();
        let d = div_vector(&u);
        assert!(d.values().iter().all(|v| (v - 3.0).abs() < 1e-12));
    }

    #[test]
    fn rigid_rotation_curl() {
        let g = Grid::new(&[5, 5, 5], &[1.0; 3], &[Boundary::OneSided; 3]).unwrap();
        let u = VectorField::sample(g, |x| [-x[1], x[0], 0.0]).unwrap();
        let w = curl_3d(&u).unwrap();
        for cell in 0..g.cell_count() {
            let c = w.at(cell);
            assert!(c[0].abs() < 1e-12 && c[1].abs() < 1e-12 && (c[2] - 2.0).abs() < 1e-12);
        }
        assert!(curl_2d(&u).is_err());
    }

    #[test]
    fn jacobian_and_pressure_divergence() {
        let g = mixed_grid();
        let u = VectorField::sample(g, |x| [x[0], 2.0 * x[0], 0.0]).unwrap();
        let j = grad_vector(&u);
        // (grad u)_{ij} = ∂_j u_i
        assert!((j.at(7)[0] - 1.0).abs() < 1e-12);
        assert!((j.at(7)[2] - 2.0).abs() < 1e-12);
        assert!(j.at(7)[1].abs() < 1e-12 && j.at(7)[3].abs() < 1e-12);

        let t = Field::from_fn(g, Tensor, |x, out| {
            out.copy_from_slice(&[-x[0], 0.0, 0.0, -x[0]]);
        })
        .unwrap();
        let d = div_tensor(&t);
        assert!(d
            .values()
            .chunks(2)
            .all(|c| (c[0] + 1.0).abs() < 1e-12 && c[1] == 0.0));
    }

    #[test]
    fn div_tensor_contracts_last_index() {
        let g = mixed_grid();
        // T_{01} = x: only ∂_1 T_{01} would contribute under the other convention.
        let t = Field::from_fn(g, Tensor, |x, out| {
            out.copy_from_slice(&[0.0, x[0], 0.0, 0.0]);
        })
        .unwrap();
        let d = div_tensor(&t);
        assert!(d.max_abs() < 1e-12);
        let t2 = Field::from_fn(g, Tensor, |x, out| {
            out.copy_from_slice(&[0.0, 0.0, x[0], 0.0]);
        })
        .unwrap();
        let d2 = div_tensor(&t2);
        assert!(d2
            .values()
            .chunks(2)
            .all(|c| c[0].abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12));
    }

    #[test]
    fn order_gradient_identity_pattern() {
        let g = mixed_grid();
        let nu = OrderField::sample(g, 2, |x, o| {
            o[0] = x[0];
            o[1] = x[1];
        })
        .unwrap();
        let gn = order_grad(&nu);
        // y is periodic, so ν² = y is not linear across the seam; test rows
        // away from it.
        let cell = g.linear_index([2, 2, 0]);
        let c = gn.at(cell);
        assert!((c[0] - 1.0).abs() < 1e-12 && c[1].abs() < 1e-12);
        assert!(c[2].abs() < 1e-12 && (c[3] - 1.0).abs() < 1e-12);
        let uniform = OrderField::uniform(g, Order(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(order_second_grad(&uniform).max_abs(), 0.0);
    }

    #[test]
    fn advection_of_linear_field() {
        let g = mixed_grid();
        let f = ScalarField::sample(g, |x| x[0]).unwrap();
        let v = VectorField::uniform(g, Vector, &[2.0, 0.0]).unwrap();
        let a = advect_steady(&f, &v).unwrap();
        assert!(a.values().iter().all(|x| (x - 2.0).abs() < 1e-12));
        let other = Grid::periodic(2, 8).unwrap();
        let v2 = VectorField::zeros(other, Vector);
        assert!(matches!(advect_steady(&f, &v2), Err(Error::GridMismatch)));
    }
}
