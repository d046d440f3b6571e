use crate::error::{Error, Result};
use crate::field::{Scalar, ScalarField, VectorField};

/// Mechanical part of the free energy as a function of specific volume ι.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MechanicalEnergy {
    /// `c (ι − ι0)² / 2`. A negative `c` gives a concave (spinodal) branch.
    Quadratic { c: f64, iota0: f64 },
    /// `c (ι − ι1)² (ι − ι2)²`.
    TwoWell { c: f64, iota1: f64, iota2: f64 },
}

impl MechanicalEnergy {
    pub fn value(&self, iota: f64) -> f64 {
        match *self {
            MechanicalEnergy::Quadratic { c, iota0 } => 0.5 * c * (iota - iota0).powi(2),
            MechanicalEnergy::TwoWell { c, iota1, iota2 } => {
                c * (iota - iota1).powi(2) * (iota - iota2).powi(2)
            }
        }
    }

    pub fn derivative(&self, iota: f64) -> f64 {
        match *self {
            MechanicalEnergy::Quadratic { c, iota0 } => c * (iota - iota0),
            MechanicalEnergy::TwoWell { c, iota1, iota2 } => {
                2.0 * c * (iota - iota1) * (iota - iota2) * (2.0 * iota - iota1 - iota2)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            MechanicalEnergy::Quadratic { c, iota0 } => c.is_finite() && iota0.is_finite(),
            MechanicalEnergy::TwoWell { c, iota1, iota2 } => {
                c.is_finite() && iota1.is_finite() && iota2.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!(
                "non-finite parameter in {self:?}"
            )))
        }
    }
}

/// Entropic part `e0 exp(η / cv)`, so that ϑ = ∂_η φ is always positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropicPart {
    pub e0: f64,
    pub cv: f64,
}

impl Default for EntropicPart {
    fn default() -> Self {
        EntropicPart { e0: 1.0, cv: 1.0 }
    }
}

impl EntropicPart {
    pub fn new(e0: f64, cv: f64) -> Result<Self> {
        if !(e0.is_finite() && e0 > 0.0 && cv.is_finite() && cv > 0.0) {
            return Err(Error::InvalidModel(format!(
                "entropic part needs e0 > 0 and cv > 0, got e0 = {e0}, cv = {cv}"
            )));
        }
        Ok(EntropicPart { e0, cv })
    }

    pub fn value(&self, eta: f64) -> f64 {
        self.e0 * (eta / self.cv).exp()
    }

    /// Temperature ϑ = ∂_η φ.
    pub fn temperature(&self, eta: f64) -> f64 {
        self.e0 / self.cv * (eta / self.cv).exp()
    }
}

/// Korteweg fluid: `φ = f(ι) + e0 exp(η/cv) + ½ β |grad ι|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KortewegModel {
    pub mech: MechanicalEnergy,
    pub entropic: EntropicPart,
    pub beta: f64,
}

impl KortewegModel {
    pub fn new(mech: MechanicalEnergy, entropic: EntropicPart, beta: f64) -> Result<Self> {
        mech.validate()?;
        EntropicPart::new(entropic.e0, entropic.cv)?;
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "beta must be >= 0, got {beta}"
            )));
        }
        Ok(KortewegModel {
            mech,
            entropic,
            beta,
        })
    }

    pub fn energy(&self, iota: f64, grad_iota: &[f64], eta: f64) -> f64 {
        let g2: f64 = grad_iota.iter().map(|g| g * g).sum();
        self.mech.value(iota) + self.entropic.value(eta) + 0.5 * self.beta * g2
    }

    pub fn d_iota(&self, iota: f64) -> f64 {
        self.mech.derivative(iota)
    }

    pub fn temperature(&self, eta: f64) -> f64 {
        self.entropic.temperature(eta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KortewegPartials {
    pub phi: ScalarField,
    pub d_iota: ScalarField,
    pub d_grad_iota: VectorField,
    pub theta: ScalarField,
}

/// Pointwise partials of a Korteweg potential.
pub fn korteweg_partials(
    model: &KortewegModel,
    iota: &ScalarField,
    grad_iota: &VectorField,
    eta: &ScalarField,
) -> Result<KortewegPartials> {
    let grid = *iota.grid();
    grid.check_same(grad_iota.grid())?;
    grid.check_same(eta.grid())?;
    let phi = ScalarField::try_build(grid, Scalar, "phi", |c, o| {
        o[0] = model.energy(iota.value(c), grad_iota.at(c), eta.value(c));
    })?;
    let d_iota = ScalarField::try_build(grid, Scalar, "dphi/diota", |c, o| {
        o[0] = model.d_iota(iota.value(c));
    })?;
    let d_grad_iota = grad_iota.scale(model.beta);
    let theta = ScalarField::try_build(grid, Scalar, "temperature", |c, o| {
        o[0] = model.temperature(eta.value(c));
    })?;
    Ok(KortewegPartials {
        phi,
        d_iota,
        d_grad_iota,
        theta,
    })
}

/// Substructural co-energy `χ = ½ κ(ι) ι̇²` with `κ(ι) = κ0 + κ1 ι`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KortewegCoEnergy {
    pub kappa0: f64,
    pub kappa1: f64,
}

impl KortewegCoEnergy {
    pub fn new(kappa0: f64, kappa1: f64) -> Result<Self> {
        if !(kappa0.is_finite() && kappa1.is_finite()) {
            return Err(Error::InvalidModel(
                "non-finite co-energy coefficient".into(),
            ));
        }
        Ok(KortewegCoEnergy { kappa0, kappa1 })
    }

    pub fn kappa(&self, iota: f64) -> f64 {
        self.kappa0 + self.kappa1 * iota
    }

    pub fn value(&self, iota: f64, iota_dot: f64) -> f64 {
        0.5 * self.kappa(iota) * iota_dot * iota_dot
    }

    pub fn d_iota_dot(&self, iota: f64, iota_dot: f64) -> f64 {
        self.kappa(iota) * iota_dot
    }

    pub fn d_iota(&self, iota_dot: f64) -> f64 {
        0.5 * self.kappa1 * iota_dot * iota_dot
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoEnergyTerms {
    pub d_iota_dot: ScalarField,
    pub d_iota: ScalarField,
}

/// `∂_ι̇ χ = κ(ι) ι̇` and `∂_ι χ = ½ κ'(ι) ι̇²`. κ must stay positive on the
/// sampled ι.
pub fn korteweg_coenergy_terms(
    coenergy: &KortewegCoEnergy,
    iota: &ScalarField,
    iota_dot: &ScalarField,
) -> Result<CoEnergyTerms> {
    let grid = *iota.grid();
    grid.check_same(iota_dot.grid())?;
    if let Some(cell) = (0..grid.cell_count()).find(|&c| coenergy.kappa(iota.value(c)) <= 0.0) {
        return Err(Error::InvalidModel(format!(
            "kappa(iota) = {} is not positive at cell {cell}",
            coenergy.kappa(iota.value(cell))
        )));
    }
    let d_iota_dot = ScalarField::try_build(grid, Scalar, "dchi/diota_dot", |c, o| {
        o[0] = coenergy.d_iota_dot(iota.value(c), iota_dot.value(c));
    })?;
    let d_iota = ScalarField::try_build(grid, Scalar, "dchi/diota", |c, o| {
        o[0] = coenergy.d_iota(iota_dot.value(c));
    })?;
    Ok(CoEnergyTerms { d_iota_dot, d_iota })
}
