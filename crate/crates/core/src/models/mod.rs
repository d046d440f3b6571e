//! Constitutive catalog: free energies φ and kinetic co-energies χ with
//! closed-form partial derivatives.

mod complex;
mod korteweg;
mod validate;

pub(crate) use complex::check_order;
pub use complex::{
    gl_partials, order_coenergy_terms, ComplexFluidModel, ComplexPartials, Gamma, OrderCoEnergy,
    OrderCoEnergyTerms, OrderPotential,
};
pub use korteweg::{
    korteweg_coenergy_terms, korteweg_partials, CoEnergyTerms, EntropicPart, KortewegCoEnergy,
    KortewegModel, KortewegPartials, MechanicalEnergy,
};
pub use validate::{
    catalog, validate_partials, ConstitutiveLaw, ScaledPartial, ValidationFailure,
    ValidationReport, DEFAULT_POINTS, DEFAULT_SEED, FD_TOLERANCE,
};
