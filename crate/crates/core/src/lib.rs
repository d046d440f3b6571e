//! Discrete fields, operators and term-by-term Crocco vorticity relations for
//! Korteweg and complex fluids on structured grids.

pub mod crocco;
pub mod error;
pub mod field;
pub mod grid;
pub mod manufactured;
pub mod models;
pub mod ops;
pub mod refine;
pub mod smectic;
pub mod transport;

pub use error::{Error, Result};
pub use field::{
    Field, Norms, Order, OrderField, OrderGrad, OrderGradField, OrderHess, OrderHessField, Scalar,
    ScalarField, Shape, Tensor, TensorField, Vector, VectorField,
};
pub use grid::{Boundary, Grid};
pub use refine::{ObservedOrder, RefinementReport};
