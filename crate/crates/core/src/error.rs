use thiserror::Error;

/// Errors raised by grid construction, field evaluation and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{what}: non-finite value at cell {cell} (component {component})")]
    NonFinite {
        what: String,
        cell: usize,
        component: usize,
    },

    #[error("{what}: expected {expected} values, found {found}")]
    Length {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("order-parameter dimension mismatch: expected m = {expected}, found m = {found}")]
    OrderMismatch { expected: usize, found: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("refinement study needs at least 3 levels, got {0}")]
    TooFewLevels(usize),

    #[error("refinement levels must halve the spacing: {0}")]
    BadRefinement(String),

    #[error("identity violated: observed refinement order {observed:.3} < {required}")]
    IdentityViolation { observed: f64, required: f64 },

    #[error("report schema mismatch: {0}")]
    Schema(String),

    #[error("every cell is inside a defect core (|grad w| <= {eps_reg})")]
    AllFlagged { eps_reg: f64 },

    #[error("CFL condition violated: {cfl:.4} > {limit}")]
    Cfl { cfl: f64, limit: f64 },

    #[error("unknown {0}")]
    UnknownGenerator(String),

    #[error("Poisson solve did not reach tolerance: residual {residual:e} > {tolerance:e}")]
    Poisson { residual: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
