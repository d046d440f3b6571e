//! Term-by-term Crocco relations: ω × v against the thermodynamic, enthalpy
//! and substructural terms of the classical, Korteweg and complex-fluid
//! forms.

mod complex;
mod korteweg;

pub use complex::{
    complex_crocco, complex_defect, complex_defect_identity, complex_interactions,
    complex_momentum_residual, substructural_balance_residual, ComplexInteractions, ComplexState,
};
pub use korteweg::{
    classical_crocco, defect_identity, korteweg_crocco, korteweg_defect, korteweg_enthalpy,
    korteweg_pressures, korteweg_stress, steady_momentum_residual, KortewegEnthalpy,
    KortewegPressures, KortewegState,
};

use crate::error::{Error, Result};
use crate::field::{
    lamb_vector_2d, lamb_vector_3d, Field, Norms, Scalar, ScalarField, Vector, VectorField,
};
use crate::grid::Grid;
use crate::ops;
use crate::refine::ObservedOrder;

/// Minimum observed order below which an identity is reported as violated.
pub const IDENTITY_MIN_ORDER: f64 = 1.5;

/// Which relation a report instantiates; fixes the term schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Classical,
    Korteweg,
    Complex,
    Smectic,
}

const CLASSICAL_TERMS: &[&str] = &["thermo", "enthalpy"];
const KORTEWEG_TERMS: &[&str] = &["thermo", "enthalpy", "wall", "inertia"];
const COMPLEX_TERMS: &[&str] = &[
    "thermo",
    "enthalpy",
    "microstress_gradient",
    "self_interaction",
    "order_divergence",
    "order_curvature",
];

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Classical => "classical",
            Relation::Korteweg => "korteweg",
            Relation::Complex => "complex",
            Relation::Smectic => "smectic",
        }
    }

    /// Term names in assembly order.
    pub fn term_names(self) -> &'static [&'static str] {
        match self {
            Relation::Classical => CLASSICAL_TERMS,
            Relation::Korteweg => KORTEWEG_TERMS,
            Relation::Complex | Relation::Smectic => COMPLEX_TERMS,
        }
    }

    /// Names of the terms beyond thermo and enthalpy.
    pub fn substructural_names(self) -> &'static [&'static str] {
        &self.term_names()[2..]
    }
}

/// Evaluated Crocco relation. Each stored term carries its sign, so that
/// `residual = lhs − Σ terms`.
#[derive(Debug, Clone, PartialEq)]
pub struct CroccoReport {
    pub relation: Relation,
    pub lhs: VectorField,
    pub terms: Vec<(String, VectorField)>,
    pub residual: VectorField,
}

impl CroccoReport {
    pub(crate) fn assemble(
        relation: Relation,
        lhs: VectorField,
        terms: Vec<VectorField>,
    ) -> Result<Self> {
        let names = relation.term_names();
        debug_assert_eq!(names.len(), terms.len());
        let terms: Vec<(String, VectorField)> =
            names.iter().map(|n| n.to_string()).zip(terms).collect();
        let residual = residual_of(&lhs, &terms)?;
        Ok(CroccoReport {
            relation,
            lhs,
            terms,
            residual,
        })
    }

    pub fn term(&self, name: &str) -> Option<&VectorField> {
        self.terms.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    /// Recomputes `lhs − Σ terms` from the stored fields.
    pub fn recompute_residual(&self) -> Result<VectorField> {
        residual_of(&self.lhs, &self.terms)
    }

    pub fn check_schema(&self) -> Result<()> {
        let expected = self.relation.term_names();
        let found: Vec<&str> = self.terms.iter().map(|(n, _)| n.as_str()).collect();
        if found != expected {
            return Err(Error::Schema(format!(
                "{} report has terms {found:?}, expected {expected:?}",
                self.relation.as_str()
            )));
        }
        Ok(())
    }

    /// Sum of the substructural terms (zero field for the classical form).
    pub fn substructural_sum(&self) -> Result<VectorField> {
        let mut acc = VectorField::zeros(*self.lhs.grid(), Vector);
        for name in self.relation.substructural_names() {
            let t = self
                .term(name)
                .ok_or_else(|| Error::Schema(format!("missing term {name}")))?;
            acc = acc.add(t)?;
        }
        Ok(acc)
    }

    /// `(name, norms)` for lhs, every term and the residual, in schema order.
    pub fn norms(&self) -> Vec<(String, Norms)> {
        let mut out = vec![("lhs".to_string(), self.lhs.norms())];
        out.extend(self.terms.iter().map(|(n, f)| (n.clone(), f.norms())));
        out.push(("residual".to_string(), self.residual.norms()));
        out
    }

    /// Like `norms`, restricted to cells at least `margin` from one-sided
    /// boundaries.
    pub fn interior_norms(&self, margin: f64) -> Vec<(String, Norms)> {
        let mut out = vec![("lhs".to_string(), self.lhs.interior_norms(margin))];
        out.extend(
            self.terms
                .iter()
                .map(|(n, f)| (n.clone(), f.interior_norms(margin))),
        );
        out.push(("residual".to_string(), self.residual.interior_norms(margin)));
        out
    }
}

fn residual_of(lhs: &VectorField, terms: &[(String, VectorField)]) -> Result<VectorField> {
    let mut r = lhs.clone();
    for (_, t) in terms {
        r = r.sub(t)?;
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorollaryMode {
    /// Thermodynamic generation cancelled by the substructure: ω × v = 0.
    Cancellation,
    /// Vorticity generated by the substructure alone: thermo and enthalpy
    /// assumed to vanish.
    Generation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryCheck {
    pub mode: CorollaryMode,
    /// Per-cell Euclidean norm of the imbalance.
    pub imbalance: ScalarField,
    pub norms: Norms,
}

/// Cancellation: `|thermo + enthalpy + Σ substructural|`, zero when ω × v = 0
/// is predicted. Generation: `|lhs − Σ substructural|`.
pub fn corollary_check(report: &CroccoReport, mode: CorollaryMode) -> Result<CorollaryCheck> {
    report.check_schema()?;
    let sub = report.substructural_sum()?;
    let v = match mode {
        CorollaryMode::Cancellation => report.terms[0].1.add(&report.terms[1].1)?.add(&sub)?,
        CorollaryMode::Generation => report.lhs.sub(&sub)?,
    };
    let imbalance = v.magnitude();
    let norms = imbalance.norms();
    Ok(CorollaryCheck {
        mode,
        imbalance,
        norms,
    })
}

/// ω × v, with the planar convention in 2-D.
pub fn lamb(v: &VectorField) -> Result<VectorField> {
    match v.dim() {
        2 => lamb_vector_2d(&ops::curl_2d(v)?, v),
        _ => lamb_vector_3d(&ops::curl_3d(v)?, v),
    }
}

pub(crate) fn check_positive(iota: &ScalarField) -> Result<()> {
    match iota.values().iter().position(|&x| x <= 0.0) {
        None => Ok(()),
        Some(cell) => Err(Error::InvalidState(format!(
            "specific volume must be positive, found {} at cell {cell}",
            iota.values()[cell]
        ))),
    }
}

pub(crate) fn scalar(grid: Grid, f: impl Fn(usize) -> f64 + Sync) -> ScalarField {
    Field::build(grid, Scalar, |c, o| o[0] = f(c))
}

pub(crate) fn vector(grid: Grid, f: impl Fn(usize, &mut [f64]) + Sync) -> VectorField {
    Field::build(grid, Vector, f)
}

/// Flags a fitted order below the identity threshold.
pub(crate) fn require_order(order: ObservedOrder) -> Result<()> {
    if order.at_least(IDENTITY_MIN_ORDER) {
        Ok(())
    } else {
        Err(Error::IdentityViolation {
            observed: order.value(),
            required: IDENTITY_MIN_ORDER,
        })
    }
}
