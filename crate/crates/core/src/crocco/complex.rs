use crate::error::{Error, Result};
use crate::field::{
    Order, OrderField, OrderGradField, ScalarField, Tensor, TensorField, VectorField,
};
use crate::grid::Grid;
use crate::models::{order_coenergy_terms, ComplexPartials, OrderCoEnergy, OrderPotential};
use crate::ops;
use crate::refine::{refinement_study, RefinementReport};

use super::{check_positive, lamb, require_order, scalar, vector, CroccoReport, Relation};

/// Steady complex-fluid state. ν̇ = (grad ν)·v is derived.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexState {
    v: VectorField,
    iota: ScalarField,
    eta: ScalarField,
    nu: OrderField,
}

impl ComplexState {
    pub fn new(
        v: VectorField,
        iota: ScalarField,
        eta: ScalarField,
        nu: OrderField,
    ) -> Result<Self> {
        v.grid().check_same(iota.grid())?;
        v.grid().check_same(eta.grid())?;
        v.grid().check_same(nu.grid())?;
        check_positive(&iota)?;
        Ok(ComplexState { v, iota, eta, nu })
    }

    pub fn grid(&self) -> &Grid {
        self.v.grid()
    }

    pub fn m(&self) -> usize {
        self.nu.m()
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

    pub fn nu(&self) -> &OrderField {
        &self.nu
    }

    pub fn nu_dot(&self) -> OrderField {
        let gnu = ops::order_grad(&self.nu);
        nu_dot(&gnu, &self.v)
    }
}

fn nu_dot(gnu: &OrderGradField, v: &VectorField) -> OrderField {
    let grid = *v.grid();
    let dim = grid.dim();
    let m = gnu.m();
    OrderField::build(grid, Order(m), |c, o| {
        let g = gnu.at(c);
        let u = v.at(c);
        for (a, oa) in o.iter_mut().enumerate() {
            *oa = (0..dim).map(|i| g[a * dim + i] * u[i]).sum();
        }
    })
}

struct Eval {
    grad_nu: OrderGradField,
    partials: ComplexPartials,
    rho: ScalarField,
    /// 𝒮 = ρ ∂_{grad ν} φ
    s: OrderGradField,
    /// z = ρ ∂_ν φ
    z: OrderField,
    /// J = (v·grad)(∂_ν̇ χ) − ∂_ν χ
    j: OrderField,
    div_s: OrderField,
    half_q2: ScalarField,
}

fn evaluate<P: OrderPotential + ?Sized>(
    state: &ComplexState,
    potential: &P,
    coenergy: Option<&OrderCoEnergy>,
) -> Result<Eval> {
    let grid = *state.grid();
    let m = state.m();
    if potential.m() != m {
        return Err(Error::OrderMismatch {
            expected: potential.m(),
            found: m,
        });
    }
    let grad_nu = ops::order_grad(&state.nu);
    let partials = potential.partials(&state.iota, &state.nu, &grad_nu, &state.eta)?;
    let rho = state.iota.map(|x| 1.0 / x);
    let s = partials.d_grad_nu.mul_scalar(&rho)?;
    let z = partials.d_nu.mul_scalar(&rho)?;
    let j = match coenergy {
        Some(ce) => {
            let t = order_coenergy_terms(ce, &state.nu, &nu_dot(&grad_nu, &state.v))?;
            ops::advect_steady(&t.d_nu_dot, &state.v)?.sub(&t.d_nu)?
        }
        None => OrderField::zeros(grid, Order(m)),
    };
    let div_s = ops::order_div(&s);
    let half_q2 = scalar(grid, |c| {
        0.5 * state.v.at(c).iter().map(|u| u * u).sum::<f64>()
    });
    Ok(Eval {
        grad_nu,
        partials,
        rho,
        s,
        z,
        j,
        div_s,
        half_q2,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexInteractions {
    /// `T_ij = ρι ∂_ι φ δ_ij − Σ_α ∂_i ν^α (∂_{grad ν} φ)_α^j`
    pub t: TensorField,
    /// Microstress `𝒮 = ρ ∂_{grad ν} φ`.
    pub s: OrderGradField,
    /// Self-interaction `z = ρ ∂_ν φ`.
    pub z: OrderField,
}

pub fn complex_interactions<P: OrderPotential + ?Sized>(
    state: &ComplexState,
    potential: &P,
) -> Result<ComplexInteractions> {
    let e = evaluate(state, potential, None)?;
    let grid = *state.grid();
    let dim = grid.dim();
    let m = state.m();
    let t = TensorField::build(grid, Tensor, |c, o| {
        let pr = e.rho.value(c) * state.iota.value(c) * e.partials.d_iota.value(c);
        let g = e.grad_nu.at(c);
        let p = e.partials.d_grad_nu.at(c);
        for i in 0..dim {
            for jj in 0..dim {
                let te: f64 = (0..m).map(|a| g[a * dim + i] * p[a * dim + jj]).sum();
                o[i * dim + jj] = if i == jj { pr } else { 0.0 } - te;
            }
        }
    });
    Ok(ComplexInteractions { t, s: e.s, z: e.z })
}

fn balance(e: &Eval) -> Result<OrderField> {
    e.div_s.sub(&e.z)?.sub(&e.j)
}

/// `B = div 𝒮 − z − ((v·grad)(Ω ν̇ + λ) − ∂_ν χ)`, zero when the
/// substructural balance holds.
pub fn substructural_balance_residual<P: OrderPotential + ?Sized>(
    state: &ComplexState,
    potential: &P,
    coenergy: Option<&OrderCoEnergy>,
) -> Result<OrderField> {
    balance(&evaluate(state, potential, coenergy)?)
}

/// Crocco relation of a complex fluid, assembled componentwise:
///
/// ```text
/// (ω×v)_i = ϑ ∂_i η − ∂_i h_c
///           − Σ ∂_i P_α^j ∂_j ν^α
///           − Σ ∂_i X_α ν^α
///           − ι Σ ∂_i ν^α ∂_j P_α^j
///           − ι Σ P_α^j ∂_i ∂_j ν^α
/// ```
///
/// with `P = ∂_{grad ν} φ`, `X = ι(div 𝒮 − J)` and
/// `h_c = ½q² + φ − ι∂_ιφ − ∂_νφ·ν − P·grad ν`.
pub fn complex_crocco<P: OrderPotential + ?Sized>(
    state: &ComplexState,
    potential: &P,
    coenergy: Option<&OrderCoEnergy>,
) -> Result<CroccoReport> {
    crocco_as(Relation::Complex, state, potential, coenergy)
}

pub(crate) fn crocco_as<P: OrderPotential + ?Sized>(
    relation: Relation,
    state: &ComplexState,
    potential: &P,
    coenergy: Option<&OrderCoEnergy>,
) -> Result<CroccoReport> {
    let e = evaluate(state, potential, coenergy)?;
    let grid = *state.grid();
    let dim = grid.dim();
    let m = state.m();
    let iota = &state.iota;
    let nu = &state.nu;
    let cp = &e.partials;

    let lhs = lamb(&state.v)?;
    let thermo = ops::grad_scalar(&state.eta).mul_scalar(&cp.theta)?;
    let h_c = scalar(grid, |c| {
        let n = nu.at(c);
        let dn = cp.d_nu.at(c);
        let p = cp.d_grad_nu.at(c);
        let g = e.grad_nu.at(c);
        let nu_part: f64 = (0..m).map(|a| dn[a] * n[a]).sum();
        let grad_part: f64 = p.iter().zip(g).map(|(x, y)| x * y).sum();
        e.half_q2.value(c) + cp.phi.value(c)
            - iota.value(c) * cp.d_iota.value(c)
            - nu_part
            - grad_part
    });
    let enthalpy = ops::grad_scalar(&h_c).scale(-1.0);

    // ∂_i P_α^j at (α*dim + j)*dim + i
    let grad_p = ops::grad(&cp.d_grad_nu);
    let microstress_gradient = vector(grid, |c, o| {
        let gp = grad_p.at(c);
        let g = e.grad_nu.at(c);
        for (i, oi) in o.iter_mut().enumerate() {
            let mut s = 0.0;
            for a in 0..m {
                for j in 0..dim {
                    s += gp[(a * dim + j) * dim + i] * g[a * dim + j];
                }
            }
            *oi = -s;
        }
    });

    let x = OrderField::build(grid, Order(m), |c, o| {
        let ds = e.div_s.at(c);
        let jj = e.j.at(c);
        for a in 0..m {
            o[a] = iota.value(c) * (ds[a] - jj[a]);
        }
    });
    let grad_x = ops::order_grad(&x);
    let self_interaction = vector(grid, |c, o| {
        let gx = grad_x.at(c);
        let n = nu.at(c);
        for (i, oi) in o.iter_mut().enumerate() {
            *oi = -(0..m).map(|a| gx[a * dim + i] * n[a]).sum::<f64>();
        }
    });

    let div_p = ops::order_div(&cp.d_grad_nu);
    let order_divergence = vector(grid, |c, o| {
        let g = e.grad_nu.at(c);
        let dp = div_p.at(c);
        let i_ = iota.value(c);
        for (i, oi) in o.iter_mut().enumerate() {
            *oi = -i_ * (0..m).map(|a| g[a * dim + i] * dp[a]).sum::<f64>();
        }
    });

    let hess = ops::order_second_grad(nu);
    let order_curvature = vector(grid, |c, o| {
        let p = cp.d_grad_nu.at(c);
        let hs = hess.at(c);
        let i_ = iota.value(c);
        for (i, oi) in o.iter_mut().enumerate() {
            let mut s = 0.0;
            for a in 0..m {
                for j in 0..dim {
                    s += p[a * dim + j] * hs[(a * dim + j) * dim + i];
                }
            }
            *oi = -i_ * s;
        }
    });

    CroccoReport::assemble(
        relation,
        lhs,
        vec![
            thermo,
            enthalpy,
            microstress_gradient,
            self_interaction,
            order_divergence,
            order_curvature,
        ],
    )
}

/// `R_c = ω×v + ½ grad q² + ι grad p̃ + ι div T̄^E` with `p̃ = −ρι ∂_ι φ` and
/// `T̄^E_ij = Σ_α ∂_i ν^α (∂_{grad ν} φ)_α^j`.
pub fn complex_momentum_residual<P: OrderPotential + ?Sized>(
    state: &ComplexState,
    potential: &P,
) -> Result<VectorField> {
    let e = evaluate(state, potential, None)?;
    momentum(state, &e)
}

fn momentum(state: &ComplexState, e: &Eval) -> Result<VectorField> {
    let grid = *state.grid();
    let dim = grid.dim();
    let m = state.m();
    let iota = &state.iota;
    let lhs = lamb(&state.v)?;
    let gq = ops::grad_scalar(&e.half_q2);
    let p_tilde = scalar(grid, |c| {
        -e.rho.value(c) * iota.value(c) * e.partials.d_iota.value(c)
    });
    let gp = ops::grad_scalar(&p_tilde);
    let te = TensorField::build(grid, Tensor, |c, o| {
        let g = e.grad_nu.at(c);
        let p = e.partials.d_grad_nu.at(c);
        for i in 0..dim {
            for j in 0..dim {
                o[i * dim + j] = (0..m).map(|a| g[a * dim + i] * p[a * dim + j]).sum();
            }
        }
    });
    let dte = ops::div_tensor(&te);
    Ok(vector(grid, |c, o| {
        let i_ = iota.value(c);
        for (k, ok) in o.iter_mut().enumerate() {
            *ok = lhs.at(c)[k] + gq.at(c)[k] + i_ * gp.at(c)[k] + i_ * dte.at(c)[k];
        }
    }))
}

/// `Σ_α ν^α grad(ι B_α)`: the part of the defect carried by an unbalanced
/// substructure.
fn balance_correction(state: &ComplexState, b: &OrderField) -> VectorField {
    let grid = *state.grid();
    let dim = grid.dim();
    let m = state.m();
    let ib = OrderField::build(grid, Order(m), |c, o| {
        for a in 0..m {
            o[a] = state.iota.value(c) * b.at(c)[a];
        }
    });
    let g = ops::order_grad(&ib);
    vector(grid, |c, o| {
        let n = state.nu.at(c);
        for (i, oi) in o.iter_mut().enumerate() {
            *oi = (0..m).map(|a| n[a] * g.at(c)[a * dim + i]).sum();
        }
    })
}

/// `(lhs − Σ terms) − R_c − Σ ν grad(ι B)`. Vanishes in the continuum.
pub fn complex_defect<P: OrderPotential + ?Sized>(
    state: &ComplexState,
    potential: &P,
    coenergy: Option<&OrderCoEnergy>,
) -> Result<VectorField> {
    let e = evaluate(state, potential, coenergy)?;
    let crocco = crocco_as(Relation::Complex, state, potential, coenergy)?;
    let r = momentum(state, &e)?;
    let corr = balance_correction(state, &balance(&e)?);
    crocco.residual.sub(&r)?.sub(&corr)
}

/// Refinement study of `‖(lhs − Σ terms) − R_c − Σ ν grad(ι B)‖_∞`. When the
/// substructural balance holds (B = 0) this is the plain defect-equals-
/// momentum-residual identity.
pub fn complex_defect_identity<P, F>(
    grids: &[Grid],
    potential: &P,
    coenergy: Option<&OrderCoEnergy>,
    make_state: F,
) -> Result<RefinementReport>
where
    P: OrderPotential + ?Sized,
    F: Fn(&Grid) -> Result<ComplexState>,
{
    let report = refinement_study(grids, |g| {
        let state = make_state(g)?;
        Ok(complex_defect(&state, potential, coenergy)?.norms().linf)
    })?;
    require_order(report.observed_order)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Vector;
    use crate::models::{ComplexFluidModel, EntropicPart, Gamma, MechanicalEnergy};

    fn model(m: usize) -> ComplexFluidModel {
        ComplexFluidModel::new(
            m,
            Gamma::Quadratic {
                k: 2.0,
                nu0: vec![0.0; m],
                nu1: vec![0.0; m],
            },
            MechanicalEnergy::Quadratic { c: 1.0, iota0: 1.0 },
            EntropicPart::default(),
            0.8,
            false,
        )
        .unwrap()
    }

    fn trig_state(g: &Grid) -> ComplexState {
        let v = VectorField::sample(*g, |x| [0.4 + x[1].sin(), 0.3 * x[0].cos(), 0.0]).unwrap();
        let iota = ScalarField::sample(*g, |x| 1.0 + 0.2 * x[0].cos() * x[1].sin()).unwrap();
        let eta = ScalarField::sample(*g, |x| 0.2 * x[0].sin()).unwrap();
        let nu = OrderField::sample(*g, 2, |x, o| {
            o[0] = 0.5 * x[0].sin() * x[1].cos();
            o[1] = 0.3 * x[0].cos() + 0.2 * x[1].sin();
        })
        .unwrap();
        ComplexState::new(v, iota, eta, nu).unwrap()
    }

    #[test]
    fn uniform_order_parameter_gives_pure_pressure() {
        let g = Grid::periodic(2, 8).unwrap();
        let st = ComplexState::new(
            VectorField::zeros(g, Vector),
            ScalarField::constant(g, 1.0).unwrap(),
            ScalarField::constant(g, 0.0).unwrap(),
            OrderField::uniform(g, Order(2), &[1.0, 0.0]).unwrap(),
        )
        .unwrap();
        let ci = complex_interactions(&st, &model(2)).unwrap();
        assert_eq!(ci.s.max_abs(), 0.0);
        // z = ρ k (ν − ν0) = (2, 0)
        assert!(ci.z.values().chunks(2).all(|c| c == [2.0, 0.0]));
        assert!(ci
            .t
            .values()
            .chunks(4)
            .all(|c| c[1] == 0.0 && c[2] == 0.0 && c[0] == c[3]));
    }

    #[test]
    fn uniform_everything_reduces_to_classical_shape() {
        let g = Grid::periodic(2, 8).unwrap();
        let st = ComplexState::new(
            VectorField::uniform(g, Vector, &[0.5, 0.5]).unwrap(),
            ScalarField::constant(g, 1.2).unwrap(),
            ScalarField::constant(g, 0.1).unwrap(),
            OrderField::uniform(g, Order(2), &[0.3, -0.2]).unwrap(),
        )
        .unwrap();
        let r = complex_crocco(&st, &model(2), None).unwrap();
        for name in Relation::Complex.substructural_names() {
            assert_eq!(r.term(name).unwrap().max_abs(), 0.0, "{name}");
        }
        r.check_schema().unwrap();
    }

    #[test]
    fn constant_covector_does_not_enter_the_balance() {
        let g = Grid::periodic(2, 16).unwrap();
        let st = trig_state(&g);
        let omega = vec![1.0, 0.2, 0.2, 0.5];
        let plain = OrderCoEnergy::new(omega.clone(), vec![0.0, 0.0]).unwrap();
        let shifted = OrderCoEnergy::new(omega, vec![3.0, -1.0]).unwrap();
        let b0 = substructural_balance_residual(&st, &model(2), Some(&plain)).unwrap();
        let b1 = substructural_balance_residual(&st, &model(2), Some(&shifted)).unwrap();
        assert!(b0.sub(&b1).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn order_mismatch_is_rejected() {
        let g = Grid::periodic(2, 8).unwrap();
        let st = trig_state(&g);
        assert!(matches!(
            complex_crocco(&st, &model(3), None),
            Err(Error::OrderMismatch { .. })
        ));
    }

    #[test]
    fn three_route_identity_converges() {
        let grids = Grid::periodic(2, 16).unwrap().hierarchy(3);
        let ce = OrderCoEnergy::new(vec![1.0, 0.2, 0.2, 0.5], vec![0.3, -0.1]).unwrap();
        for co in [None, Some(&ce)] {
            let r = complex_defect_identity(&grids, &model(2), co, |g| Ok(trig_state(g))).unwrap();
            assert!(r.observed_order.at_least(1.8), "{r:?}");
        }
    }
}
