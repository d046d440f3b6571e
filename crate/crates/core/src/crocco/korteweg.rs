use crate::error::{Error, Result};
use crate::field::{ScalarField, Tensor, TensorField, VectorField};
use crate::grid::Grid;
use crate::models::{korteweg_coenergy_terms, korteweg_partials, KortewegCoEnergy, KortewegModel};
use crate::ops;
use crate::refine::{refinement_study, RefinementReport};

use super::{check_positive, lamb, require_order, scalar, vector, CroccoReport, Relation};

/// Steady Korteweg state. ρ = 1/ι and ι̇ = v·grad ι are derived.
#[derive(Debug, Clone, PartialEq)]
pub struct KortewegState {
    v: VectorField,
    iota: ScalarField,
    eta: ScalarField,
}

impl KortewegState {
    pub fn new(v: VectorField, iota: ScalarField, eta: ScalarField) -> Result<Self> {
        v.grid().check_same(iota.grid())?;
        v.grid().check_same(eta.grid())?;
        check_positive(&iota)?;
        Ok(KortewegState { v, iota, eta })
    }

    pub fn grid(&self) -> &Grid {
        self.v.grid()
    }

    pub fn v(&self) -> &VectorField {
        &self.v
    }

    pub fn iota(&self) -> &ScalarField {
        &self.iota
    }

    pub fn eta(&self) -> &ScalarField {
        &self.eta
    }

    pub fn rho(&self) -> ScalarField {
        self.iota.map(|x| 1.0 / x)
    }

    pub fn iota_dot(&self) -> ScalarField {
        ops::advect_steady(&self.iota, &self.v).expect("grids checked at construction")
    }
}

/// Shared intermediate fields of one Korteweg evaluation.
struct Eval {
    grad_iota: VectorField,
    phi: ScalarField,
    d_iota: ScalarField,
    s: VectorField,
    theta: ScalarField,
    rho_s: VectorField,
    /// div(ρ ∂_{grad ι} φ)
    d: ScalarField,
    p: ScalarField,
    p_check: ScalarField,
    p_bar: ScalarField,
    /// (v·grad)(∂_ι̇ χ) − ∂_ι χ
    inertial: ScalarField,
    half_q2: ScalarField,
}

fn evaluate(
    state: &KortewegState,
    model: &KortewegModel,
    coenergy: Option<&KortewegCoEnergy>,
) -> Result<Eval> {
    let grid = *state.grid();
    let iota = &state.iota;
    let grad_iota = ops::grad_scalar(iota);
    let kp = korteweg_partials(model, iota, &grad_iota, &state.eta)?;
    let rho = state.rho();
    let rho_s = kp.d_grad_iota.mul_scalar(&rho)?;
    let d = ops::div_vector(&rho_s);
    let p = scalar(grid, |c| {
        let i = iota.value(c);
        -rho.value(c) * i * kp.d_iota.value(c) + i * d.value(c)
    });
    let (adv, dchi) = match coenergy {
        Some(ce) => {
            let t = korteweg_coenergy_terms(ce, iota, &state.iota_dot())?;
            (ops::advect_steady(&t.d_iota_dot, &state.v)?, t.d_iota)
        }
        None => (
            ScalarField::constant(grid, 0.0)?,
            ScalarField::constant(grid, 0.0)?,
        ),
    };
    let p_check = scalar(grid, |c| {
        rho.value(c) * iota.value(c) * adv.value(c) - dchi.value(c)
    });
    let p_bar = p.sub(&p_check)?;
    let inertial = adv.sub(&dchi)?;
    let half_q2 = scalar(grid, |c| {
        0.5 * state.v.at(c).iter().map(|u| u * u).sum::<f64>()
    });
    Ok(Eval {
        grad_iota,
        phi: kp.phi,
        d_iota: kp.d_iota,
        s: kp.d_grad_iota,
        theta: kp.theta,
        rho_s,
        d,
        p,
        p_check,
        p_bar,
        inertial,
        half_q2,
    })
}

fn stress(e: &Eval) -> TensorField {
    let grid = *e.grad_iota.grid();
    let dim = grid.dim();
    TensorField::build(grid, Tensor, |c, o| {
        let g = e.grad_iota.at(c);
        let s = e.rho_s.at(c);
        for i in 0..dim {
            for j in 0..dim {
                o[i * dim + j] = g[i] * s[j];
            }
        }
    })
}

/// Korteweg stress `T^E = grad ι ⊗ ρ ∂_{grad ι} φ`.
pub fn korteweg_stress(state: &KortewegState, model: &KortewegModel) -> Result<TensorField> {
    Ok(stress(&evaluate(state, model, None)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KortewegPressures {
    pub p: ScalarField,
    pub p_bar: ScalarField,
    pub p_check: ScalarField,
}

/// `p = −ρι ∂_ι φ + ι div(ρ ∂_{grad ι} φ)`,
/// `p̌ = ρι (v·grad)(∂_ι̇ χ) − ∂_ι χ`, `p̄ = p − p̌`.
pub fn korteweg_pressures(
    state: &KortewegState,
    model: &KortewegModel,
    coenergy: Option<&KortewegCoEnergy>,
) -> Result<KortewegPressures> {
    let e = evaluate(state, model, coenergy)?;
    Ok(KortewegPressures {
        p: e.p,
        p_bar: e.p_bar,
        p_check: e.p_check,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KortewegEnthalpy {
    /// `ξ = φ − ι ∂_ι φ − ∂_{grad ι} φ · grad ι`
    pub xi: ScalarField,
    /// The same quantity through the pressures:
    /// `φ + ι p̄ − ι² div(ρ∂φ) + ι p̌ − ∂φ·grad ι`.
    pub xi_pressure: ScalarField,
    /// `h = ½ q² + ξ`
    pub h: ScalarField,
}

fn enthalpy(state: &KortewegState, e: &Eval) -> KortewegEnthalpy {
    let grid = *state.grid();
    let iota = &state.iota;
    let sg = |c: usize| -> f64 {
        e.s.at(c)
            .iter()
            .zip(e.grad_iota.at(c))
            .map(|(a, b)| a * b)
            .sum()
    };
    let xi = scalar(grid, |c| {
        e.phi.value(c) - iota.value(c) * e.d_iota.value(c) - sg(c)
    });
    let xi_pressure = scalar(grid, |c| {
        let i = iota.value(c);
        e.phi.value(c) + i * e.p_bar.value(c) - i * i * e.d.value(c) + i * e.p_check.value(c)
            - sg(c)
    });
    let h = scalar(grid, |c| e.half_q2.value(c) + xi.value(c));
    KortewegEnthalpy { xi, xi_pressure, h }
}

pub fn korteweg_enthalpy(
    state: &KortewegState,
    model: &KortewegModel,
    coenergy: Option<&KortewegCoEnergy>,
) -> Result<KortewegEnthalpy> {
    let e = evaluate(state, model, coenergy)?;
    Ok(enthalpy(state, &e))
}

/// Crocco relation with gradient and substructural-inertia terms:
/// `ω×v = ϑ grad η − grad h − grad(ι² div(ρ∂φ) + ∂φ·grad ι)
///        + ι grad((v·grad)∂_ι̇χ − ∂_ιχ)`.
pub fn korteweg_crocco(
    state: &KortewegState,
    model: &KortewegModel,
    coenergy: Option<&KortewegCoEnergy>,
) -> Result<CroccoReport> {
    let e = evaluate(state, model, coenergy)?;
    let grid = *state.grid();
    let iota = &state.iota;
    let lhs = lamb(&state.v)?;
    let thermo = ops::grad_scalar(&state.eta).mul_scalar(&e.theta)?;
    let en = enthalpy(state, &e);
    let enthalpy_term = ops::grad_scalar(&en.h).scale(-1.0);
    let wall_potential = scalar(grid, |c| {
        let i = iota.value(c);
        let sg: f64 =
            e.s.at(c)
                .iter()
                .zip(e.grad_iota.at(c))
                .map(|(a, b)| a * b)
                .sum();
        i * i * e.d.value(c) + sg
    });
    let wall = ops::grad_scalar(&wall_potential).scale(-1.0);
    let inertia = ops::grad_scalar(&e.inertial).mul_scalar(iota)?;
    CroccoReport::assemble(
        Relation::Korteweg,
        lhs,
        vec![thermo, enthalpy_term, wall, inertia],
    )
}

/// Classical Crocco relation `ω×v = ϑ grad η − grad H` with
/// `H = ½ q² + φ − ι ∂_ι φ`. The model must be gradient-free (β = 0).
pub fn classical_crocco(state: &KortewegState, model: &KortewegModel) -> Result<CroccoReport> {
    if model.beta != 0.0 {
        return Err(Error::InvalidModel(format!(
            "classical relation needs beta = 0, got {}",
            model.beta
        )));
    }
    let e = evaluate(state, model, None)?;
    let grid = *state.grid();
    let iota = &state.iota;
    let lhs = lamb(&state.v)?;
    let thermo = ops::grad_scalar(&state.eta).mul_scalar(&e.theta)?;
    let big_h = scalar(grid, |c| {
        e.half_q2.value(c) + (e.phi.value(c) - iota.value(c) * e.d_iota.value(c))
    });
    let enthalpy_term = ops::grad_scalar(&big_h).scale(-1.0);
    CroccoReport::assemble(Relation::Classical, lhs, vec![thermo, enthalpy_term])
}

/// `R = ω×v + ½ grad q² + ι grad p̄ + ι div T^E`, zero when the steady
/// momentum balance holds.
pub fn steady_momentum_residual(
    state: &KortewegState,
    model: &KortewegModel,
    coenergy: Option<&KortewegCoEnergy>,
) -> Result<VectorField> {
    let e = evaluate(state, model, coenergy)?;
    let grid = *state.grid();
    let lhs = lamb(&state.v)?;
    let gq = ops::grad_scalar(&e.half_q2);
    let gp = ops::grad_scalar(&e.p_bar);
    let dt = ops::div_tensor(&stress(&e));
    let iota = &state.iota;
    Ok(vector(grid, |c, o| {
        let i = iota.value(c);
        for (k, ok) in o.iter_mut().enumerate() {
            *ok = lhs.at(c)[k] + gq.at(c)[k] + i * gp.at(c)[k] + i * dt.at(c)[k];
        }
    }))
}

/// `(lhs − Σ terms) − R`: the part of the Crocco residual not explained by
/// the momentum residual. Vanishes in the continuum.
pub fn korteweg_defect(
    state: &KortewegState,
    model: &KortewegModel,
    coenergy: Option<&KortewegCoEnergy>,
) -> Result<VectorField> {
    let crocco = korteweg_crocco(state, model, coenergy)?;
    let r = steady_momentum_residual(state, model, coenergy)?;
    crocco.residual.sub(&r)
}

/// Refinement study of `‖(lhs − Σ terms) − R‖_∞`, which vanishes in the
/// continuum for every smooth state. Fails with an identity violation when
/// the observed order is below 1.5.
pub fn defect_identity<F>(
    grids: &[Grid],
    model: &KortewegModel,
    coenergy: Option<&KortewegCoEnergy>,
    make_state: F,
) -> Result<RefinementReport>
where
    F: Fn(&Grid) -> Result<KortewegState>,
{
    let report = refinement_study(grids, |g| {
        let state = make_state(g)?;
        Ok(korteweg_defect(&state, model, coenergy)?.norms().linf)
    })?;
    require_order(report.observed_order)?;
    Ok(report)
}
