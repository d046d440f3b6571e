use crate::error::{Error, Result};
use crate::field::{Order, OrderField, OrderGradField, Scalar, ScalarField};

use super::korteweg::{EntropicPart, KortewegModel, MechanicalEnergy};

/// Order-parameter dependent part of γ(ι, ν, η).
#[derive(Debug, Clone, PartialEq)]
pub enum Gamma {
    /// `½ k |ν − ν0(ι)|²` with `ν0(ι) = nu0 + ι nu1`.
    Quadratic {
        k: f64,
        nu0: Vec<f64>,
        nu1: Vec<f64>,
    },
    /// `c (ν_j − w1)² (ν_j − w2)²` in the single component `j`.
    TwoWell {
        c: f64,
        component: usize,
        w1: f64,
        w2: f64,
    },
}

/// Ginzburg–Landau complex fluid:
/// `φ = γ(ι, ν) + f(ι) + e0 exp(η/cv) + ½ a ‖grad ν‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFluidModel {
    m: usize,
    pub gamma: Gamma,
    pub mech: MechanicalEnergy,
    pub entropic: EntropicPart,
    pub a: f64,
    pub sphere_constrained: bool,
}

/// Tolerance on `|ν| = 1` for sphere-constrained models.
pub const SPHERE_TOL: f64 = 1e-12;

impl ComplexFluidModel {
    pub fn new(
        m: usize,
        gamma: Gamma,
        mech: MechanicalEnergy,
        entropic: EntropicPart,
        a: f64,
        sphere_constrained: bool,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidModel("order dimension m must be >= 1".into()));
        }
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::InvalidModel(format!("a must be >= 0, got {a}")));
        }
        match &gamma {
            Gamma::Quadratic { k, nu0, nu1 } => {
                if nu0.len() != m || nu1.len() != m {
                    return Err(Error::OrderMismatch {
                        expected: m,
                        found: if nu0.len() != m { nu0.len() } else { nu1.len() },
                    });
                }
                if !k.is_finite() || nu0.iter().chain(nu1).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidModel("non-finite gamma parameter".into()));
                }
            }
            Gamma::TwoWell {
                c,
                component,
                w1,
                w2,
            } => {
                if *component >= m {
                    return Err(Error::InvalidModel(format!(
                        "two-well component {component} out of range for m = {m}"
                    )));
                }
                if !(c.is_finite() && w1.is_finite() && w2.is_finite()) {
                    return Err(Error::InvalidModel("non-finite gamma parameter".into()));
                }
            }
        }
        EntropicPart::new(entropic.e0, entropic.cv)?;
        // Reuse the Korteweg checks for the mechanical part.
        KortewegModel::new(mech, entropic, 0.0)?;
        Ok(ComplexFluidModel {
            m,
            gamma,
            mech,
            entropic,
            a,
            sphere_constrained,
        })
    }

    /// The complex model that reduces to `k`: m = 1, γ independent of ν and
    /// a = β. Evaluated with ν ≡ ι it reproduces the Korteweg partials.
    pub fn korteweg_reduction(k: &KortewegModel) -> Self {
        ComplexFluidModel {
            m: 1,
            gamma: Gamma::Quadratic {
                k: 0.0,
                nu0: vec![0.0],
                nu1: vec![0.0],
            },
            mech: k.mech,
            entropic: k.entropic,
            a: k.beta,
            sphere_constrained: false,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    fn gamma_value(&self, iota: f64, nu: &[f64]) -> f64 {
        match &self.gamma {
            Gamma::Quadratic { k, nu0, nu1 } => {
                let d2: f64 = (0..self.m)
                    .map(|i| (nu[i] - nu0[i] - iota * nu1[i]).powi(2))
                    .sum();
                0.5 * k * d2
            }
            Gamma::TwoWell {
                c,
                component,
                w1,
                w2,
            } => {
                let x = nu[*component];
                c * (x - w1).powi(2) * (x - w2).powi(2)
            }
        }
    }

    /// φ at a point; `grad_nu` holds `∂_i ν^α` at `α*dim + i`.
    pub fn energy(&self, iota: f64, nu: &[f64], grad_nu: &[f64], eta: f64) -> f64 {
        let g2: f64 = grad_nu.iter().map(|g| g * g).sum();
        self.gamma_value(iota, nu)
            + self.mech.value(iota)
            + self.entropic.value(eta)
            + 0.5 * self.a * g2
    }

    pub fn d_iota(&self, iota: f64, nu: &[f64]) -> f64 {
        let from_gamma = match &self.gamma {
            Gamma::Quadratic { k, nu0, nu1 } => {
                -k * (0..self.m)
                    .map(|i| (nu[i] - nu0[i] - iota * nu1[i]) * nu1[i])
                    .sum::<f64>()
            }
            Gamma::TwoWell { .. } => 0.0,
        };
        from_gamma + self.mech.derivative(iota)
    }

    pub fn d_nu(&self, iota: f64, nu: &[f64], out: &mut [f64]) {
        match &self.gamma {
            Gamma::Quadratic { k, nu0, nu1 } => {
                for i in 0..self.m {
                    out[i] = k * (nu[i] - nu0[i] - iota * nu1[i]);
                }
            }
            Gamma::TwoWell {
                c,
                component,
                w1,
                w2,
            } => {
                out.iter_mut().for_each(|o| *o = 0.0);
                let x = nu[*component];
                out[*component] = 2.0 * c * (x - w1) * (x - w2) * (2.0 * x - w1 - w2);
            }
        }
    }

    pub fn temperature(&self, eta: f64) -> f64 {
        self.entropic.temperature(eta)
    }
}

/// Field-level partials of an order-parameter potential.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPartials {
    pub phi: ScalarField,
    pub d_iota: ScalarField,
    pub d_nu: OrderField,
    /// Microstress density `P = ∂_{grad ν} φ`, same layout as `grad ν`.
    pub d_grad_nu: OrderGradField,
    pub theta: ScalarField,
}

/// A potential that can supply the partials needed by the complex Crocco
/// evaluator. Implemented by the Ginzburg–Landau catalog and by the smectic
/// potential, whose microstress depends on second derivatives of the phase.
pub trait OrderPotential: Sync {
    fn m(&self) -> usize;
    fn partials(
        &self,
        iota: &ScalarField,
        nu: &OrderField,
        grad_nu: &OrderGradField,
        eta: &ScalarField,
    ) -> Result<ComplexPartials>;
}

impl OrderPotential for ComplexFluidModel {
    fn m(&self) -> usize {
        self.m
    }

    fn partials(
        &self,
        iota: &ScalarField,
        nu: &OrderField,
        grad_nu: &OrderGradField,
        eta: &ScalarField,
    ) -> Result<ComplexPartials> {
        gl_partials(self, iota, nu, grad_nu, eta)
    }
}

pub(crate) fn check_order(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::OrderMismatch { expected, found })
    }
}

/// Pointwise partials of a Ginzburg–Landau potential.
pub fn gl_partials(
    model: &ComplexFluidModel,
    iota: &ScalarField,
    nu: &OrderField,
    grad_nu: &OrderGradField,
    eta: &ScalarField,
) -> Result<ComplexPartials> {
    let grid = *iota.grid();
    grid.check_same(nu.grid())?;
    grid.check_same(grad_nu.grid())?;
    grid.check_same(eta.grid())?;
    check_order(model.m, nu.m())?;
    check_order(model.m, grad_nu.m())?;
    if model.sphere_constrained {
        nu.check_unit(SPHERE_TOL)?;
    }
    let phi = ScalarField::try_build(grid, Scalar, "phi", |c, o| {
        o[0] = model.energy(iota.value(c), nu.at(c), grad_nu.at(c), eta.value(c));
    })?;
    let d_iota = ScalarField::try_build(grid, Scalar, "dphi/diota", |c, o| {
        o[0] = model.d_iota(iota.value(c), nu.at(c));
    })?;
    let d_nu = OrderField::try_build(grid, Order(model.m), "dphi/dnu", |c, o| {
        model.d_nu(iota.value(c), nu.at(c), o);
    })?;
    let d_grad_nu = grad_nu.scale(model.a);
    let theta = ScalarField::try_build(grid, Scalar, "temperature", |c, o| {
        o[0] = model.temperature(eta.value(c));
    })?;
    Ok(ComplexPartials {
        phi,
        d_iota,
        d_nu,
        d_grad_nu,
        theta,
    })
}

/// Order-parameter co-energy `χ = ½ ν̇ᵀ Ω ν̇ + λ·ν̇`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderCoEnergy {
    m: usize,
    omega: Vec<f64>,
    lambda: Vec<f64>,
}

impl OrderCoEnergy {
    /// `omega` is row-major m×m, symmetric positive-definite.
    pub fn new(omega: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
        let m = lambda.len();
        if m == 0 || omega.len() != m * m {
            return Err(Error::InvalidModel(format!(
                "omega must be {m}x{m} to match lambda, got {} entries",
                omega.len()
            )));
        }
        if omega.iter().chain(&lambda).any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel(
                "non-finite co-energy coefficient".into(),
            ));
        }
        for i in 0..m {
            for j in 0..i {
                let (a, b) = (omega[i * m + j], omega[j * m + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidModel("omega is not symmetric".into()));
                }
            }
        }
        if !cholesky_ok(&omega, m) {
            return Err(Error::InvalidModel("omega is not positive-definite".into()));
        }
        Ok(OrderCoEnergy { m, omega, lambda })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn value(&self, nu_dot: &[f64]) -> f64 {
        self.kinetic(nu_dot)
            + self
                .lambda
                .iter()
                .zip(nu_dot)
                .map(|(l, d)| l * d)
                .sum::<f64>()
    }

    /// Substructural kinetic energy `½ ν̇ᵀ Ω ν̇`.
    pub fn kinetic(&self, nu_dot: &[f64]) -> f64 {
        let m = self.m;
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                s += nu_dot[i] * self.omega[i * m + j] * nu_dot[j];
            }
        }
        0.5 * s
    }

    pub fn d_nu_dot(&self, nu_dot: &[f64], out: &mut [f64]) {
        let m = self.m;
        for i in 0..m {
            out[i] = self.lambda[i]
                + (0..m)
                    .map(|j| self.omega[i * m + j] * nu_dot[j])
                    .sum::<f64>();
        }
    }
}

fn cholesky_ok(a: &[f64], m: usize) -> bool {
    let mut l = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * m + k] * l[j * m + k]).sum();
            if i == j {
                let d = a[i * m + i] - s;
                if d <= 0.0 {
                    return false;
                }
                l[i * m + i] = d.sqrt();
            } else {
                l[i * m + j] = (a[i * m + j] - s) / l[j * m + j];
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderCoEnergyTerms {
    pub d_nu_dot: OrderField,
    /// Identically zero for the constant-coefficient catalog.
    pub d_nu: OrderField,
}

pub fn order_coenergy_terms(
    coenergy: &OrderCoEnergy,
    nu: &OrderField,
    nu_dot: &OrderField,
) -> Result<OrderCoEnergyTerms> {
    let grid = *nu.grid();
    grid.check_same(nu_dot.grid())?;
    check_order(coenergy.m, nu.m())?;
    check_order(coenergy.m, nu_dot.m())?;
    let d_nu_dot = OrderField::try_build(grid, Order(coenergy.m), "dchi/dnu_dot", |c, o| {
        coenergy.d_nu_dot(nu_dot.at(c), o);
    })?;
    Ok(OrderCoEnergyTerms {
        d_nu_dot,
        d_nu: OrderField::zeros(grid, Order(coenergy.m)),
    })
}
