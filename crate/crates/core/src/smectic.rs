//! Smectic-A layers: layer function w, director n = grad w / |grad w|, the
//! compressible-layer potential and its Crocco relation.

use crate::crocco::{self, lamb, ComplexState, CroccoReport, Relation};
use crate::error::{Error, Result};
use crate::field::{
    Field, Order, OrderField, OrderGrad, OrderGradField, Scalar, ScalarField, Vector, VectorField,
};
use crate::models::{ComplexPartials, EntropicPart, MechanicalEnergy, OrderPotential};
use crate::ops;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmecticModel {
    /// Layer-compression modulus.
    pub gamma1: f64,
    /// Bending modulus.
    pub gamma2: f64,
    /// Cells with |grad w| ≤ eps_reg are treated as defect core.
    pub eps_reg: f64,
    pub entropic: EntropicPart,
    /// Bulk part φ̄(ι); ignored in incompressible mode.
    pub bulk: Option<MechanicalEnergy>,
    /// Layer inertia coefficient. Accepted for completeness; the smectic
    /// relation is evaluated without layer inertia.
    pub alpha: f64,
}

impl SmecticModel {
    pub fn new(gamma1: f64, gamma2: f64, eps_reg: f64) -> Result<Self> {
        if !(gamma1.is_finite() && gamma1 > 0.0 && gamma2.is_finite() && gamma2 > 0.0) {
            return Err(Error::InvalidModel(format!(
                "smectic moduli must be positive, got gamma1 = {gamma1}, gamma2 = {gamma2}"
            )));
        }
        if !(eps_reg.is_finite() && eps_reg >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "eps_reg must be >= 0, got {eps_reg}"
            )));
        }
        Ok(SmecticModel {
            gamma1,
            gamma2,
            eps_reg,
            entropic: EntropicPart::default(),
            bulk: None,
            alpha: 0.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmecticState {
    v: VectorField,
    eta: ScalarField,
    w: ScalarField,
    iota: Option<ScalarField>,
}

impl SmecticState {
    /// Incompressible state (ι ≡ 1).
    pub fn new(v: VectorField, eta: ScalarField, w: ScalarField) -> Result<Self> {
        v.grid().check_same(eta.grid())?;
        v.grid().check_same(w.grid())?;
        Ok(SmecticState {
            v,
            eta,
            w,
            iota: None,
        })
    }

    /// Compressible state; the bulk energy φ̄(ι) is included.
    pub fn with_iota(mut self, iota: ScalarField) -> Result<Self> {
        self.v.grid().check_same(iota.grid())?;
        crocco::check_positive(&iota)?;
        self.iota = Some(iota);
        Ok(self)
    }

    pub fn v(&self) -> &VectorField {
        &self.v
    }

    pub fn eta(&self) -> &ScalarField {
        &self.eta
    }

    pub fn w(&self) -> &ScalarField {
        &self.w
    }

    pub fn iota(&self) -> Option<&ScalarField> {
        self.iota.as_ref()
    }

    pub fn is_incompressible(&self) -> bool {
        self.iota.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Director {
    pub n: VectorField,
    /// Defect-core cells, where |grad w| ≤ eps_reg.
    pub flagged: Vec<usize>,
    pub eps_reg: f64,
}

fn director_from_grad(g: &VectorField, eps_reg: f64) -> Result<Director> {
    let grid = *g.grid();
    let n = Field::build(grid, Vector, |c, o| {
        let gc = g.at(c);
        let mag = gc.iter().map(|x| x * x).sum::<f64>().sqrt();
        let den = mag.max(eps_reg);
        for (oi, gi) in o.iter_mut().zip(gc) {
            *oi = if den > 0.0 { gi / den } else { 0.0 };
        }
    });
    let flagged: Vec<usize> = (0..grid.cell_count())
        .filter(|&c| g.at(c).iter().map(|x| x * x).sum::<f64>().sqrt() <= eps_reg)
        .collect();
    if flagged.len() == grid.cell_count() {
        return Err(Error::AllFlagged { eps_reg });
    }
    Ok(Director {
        n,
        flagged,
        eps_reg,
    })
}

/// `n = grad w / max(|grad w|, eps_reg)`, with defect-core cells flagged.
pub fn director(state: &SmecticState, model: &SmecticModel) -> Result<Director> {
    director_from_grad(&ops::grad_scalar(&state.w), model.eps_reg)
}

/// Layer quantities derived from grad w.
struct Layers {
    g: VectorField,
    mag: ScalarField,
    dir: Director,
    div_n: ScalarField,
}

fn layers(g: VectorField, eps_reg: f64) -> Result<Layers> {
    let dir = director_from_grad(&g, eps_reg)?;
    let mag = g.magnitude();
    let div_n = ops::div_vector(&dir.n);
    Ok(Layers { g, mag, dir, div_n })
}

fn energy_field(
    model: &SmecticModel,
    l: &Layers,
    eta: &ScalarField,
    iota: Option<&ScalarField>,
) -> Result<ScalarField> {
    ScalarField::try_build(*eta.grid(), Scalar, "smectic energy", |c, o| {
        let bulk = match (iota, model.bulk) {
            (Some(i), Some(f)) => f.value(i.value(c)),
            _ => 0.0,
        };
        let comp = l.mag.value(c) - 1.0;
        let bend = l.div_n.value(c);
        o[0] = bulk
            + model.entropic.value(eta.value(c))
            + 0.5 * model.gamma1 * comp * comp
            + 0.5 * model.gamma2 * bend * bend;
    })
}

/// `φ = φ̄(ι) + e0 exp(η/cv) + ½γ1(|grad w| − 1)² + ½γ2(div n)²`; φ̄ is
/// dropped in incompressible mode.
pub fn smectic_energy(state: &SmecticState, model: &SmecticModel) -> Result<ScalarField> {
    let l = layers(ops::grad_scalar(&state.w), model.eps_reg)?;
    energy_field(model, &l, &state.eta, state.iota.as_ref())
}

fn microstress(model: &SmecticModel, l: &Layers) -> VectorField {
    let grid = *l.g.grid();
    let dim = grid.dim();
    let grad_div_n = ops::grad_scalar(&l.div_n);
    let mut core = vec![false; grid.cell_count()];
    for &c in &l.dir.flagged {
        core[c] = true;
    }
    Field::build(grid, Vector, |c, o| {
        if core[c] {
            o.iter_mut().for_each(|x| *x = 0.0);
            return;
        }
        let n = l.dir.n.at(c);
        let u = grad_div_n.at(c);
        let mag = l.mag.value(c);
        let nu: f64 = n.iter().zip(u).map(|(a, b)| a * b).sum();
        for i in 0..dim {
            let projected = u[i] - n[i] * nu;
            o[i] = model.gamma1 * (mag - 1.0) * n[i] - model.gamma2 / mag * projected;
        }
    })
}

/// `𝒮 = γ1(|grad w| − 1) n − γ2 |grad w|⁻¹ (I − n⊗n) grad(div n)`; zero on
/// defect-core cells.
pub fn smectic_microstress(state: &SmecticState, model: &SmecticModel) -> Result<VectorField> {
    let l = layers(ops::grad_scalar(&state.w), model.eps_reg)?;
    Ok(microstress(model, &l))
}

/// The smectic potential seen as a general order-parameter potential with
/// m = 1 and ν = w, for the complex-fluid evaluator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmecticPotential {
    pub model: SmecticModel,
    /// Include φ̄(ι) (compressible mode).
    pub compressible: bool,
}

impl OrderPotential for SmecticPotential {
    fn m(&self) -> usize {
        1
    }

    fn partials(
        &self,
        iota: &ScalarField,
        nu: &OrderField,
        grad_nu: &OrderGradField,
        eta: &ScalarField,
    ) -> Result<ComplexPartials> {
        crate::models::check_order(1, nu.m())?;
        crate::models::check_order(1, grad_nu.m())?;
        let grid = *iota.grid();
        let g = VectorField::from_vec(grid, Vector, grad_nu.values().to_vec())?;
        let l = layers(g, self.model.eps_reg)?;
        let bulk_iota = if self.compressible { Some(iota) } else { None };
        let phi = energy_field(&self.model, &l, eta, bulk_iota)?;
        let d_iota = match (bulk_iota, self.model.bulk) {
            (Some(i), Some(f)) => i.map(|x| f.derivative(x)),
            _ => ScalarField::zeros(grid, Scalar),
        };
        let s = microstress(&self.model, &l);
        let d_grad_nu = OrderGradField::from_vec(grid, OrderGrad(1), s.into_values())?;
        let theta = eta.map(|e| self.model.entropic.temperature(e));
        Ok(ComplexPartials {
            phi,
            d_iota,
            d_nu: OrderField::zeros(grid, Order(1)),
            d_grad_nu,
            theta,
        })
    }
}

/// Crocco relation of an incompressible smectic without layer inertia:
///
/// ```text
/// ω×v = ϑ grad η − grad h_c − (grad 𝒮)ᵀ grad w − w grad(div 𝒮)
///       − (div 𝒮) grad w − 𝒮 · grad grad w
/// ```
///
/// with `h_c = ½q² + φ − 𝒮·grad w`. Term names and signs follow the
/// complex-fluid relation with ι ≡ 1.
pub fn smectic_crocco(state: &SmecticState, model: &SmecticModel) -> Result<CroccoReport> {
    if !state.is_incompressible() {
        return Err(Error::InvalidState(
            "the smectic relation is evaluated in incompressible mode (iota = 1)".into(),
        ));
    }
    let grid = *state.w.grid();
    let dim = grid.dim();
    let w = &state.w;
    let l = layers(ops::grad_scalar(w), model.eps_reg)?;
    let phi = energy_field(model, &l, &state.eta, None)?;
    let s = microstress(model, &l);

    let lhs = lamb(&state.v)?;
    let theta = state.eta.map(|e| model.entropic.temperature(e));
    let thermo = ops::grad_scalar(&state.eta).mul_scalar(&theta)?;
    let h_c = ScalarField::build(grid, Scalar, |c, o| {
        let q2: f64 = state.v.at(c).iter().map(|u| u * u).sum();
        let sg: f64 = s.at(c).iter().zip(l.g.at(c)).map(|(a, b)| a * b).sum();
        o[0] = 0.5 * q2 + phi.value(c) - sg;
    });
    let enthalpy = ops::grad_scalar(&h_c).scale(-1.0);

    // (grad 𝒮)_{ji} = ∂_i 𝒮_j
    let grad_s = ops::grad_vector(&s);
    let microstress_gradient = Field::build(grid, Vector, |c, o| {
        let gs = grad_s.at(c);
        let g = l.g.at(c);
        for (i, oi) in o.iter_mut().enumerate() {
            *oi = -(0..dim).map(|j| gs[j * dim + i] * g[j]).sum::<f64>();
        }
    });
    let div_s = ops::div_vector(&s);
    let grad_div_s = ops::grad_scalar(&div_s);
    let self_interaction = Field::build(grid, Vector, |c, o| {
        for (i, oi) in o.iter_mut().enumerate() {
            *oi = -(grad_div_s.at(c)[i] * w.value(c));
        }
    });
    let order_divergence = Field::build(grid, Vector, |c, o| {
        for (i, oi) in o.iter_mut().enumerate() {
            *oi = -(l.g.at(c)[i] * div_s.value(c));
        }
    });
    let hess = ops::grad_vector(&l.g);
    let order_curvature = Field::build(grid, Vector, |c, o| {
        let hs = hess.at(c);
        let sc = s.at(c);
        for (i, oi) in o.iter_mut().enumerate() {
            *oi = -(0..dim).map(|j| sc[j] * hs[j * dim + i]).sum::<f64>();
        }
    });
    CroccoReport::assemble(
        Relation::Smectic,
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

/// The embedding used by the general evaluator: ν = w with m = 1 and ι ≡ 1.
pub fn embed(state: &SmecticState) -> Result<ComplexState> {
    let grid = *state.w.grid();
    let nu = OrderField::from_vec(grid, Order(1), state.w.values().to_vec())?;
    let iota = match &state.iota {
        Some(i) => i.clone(),
        None => ScalarField::constant(grid, 1.0)?,
    };
    ComplexState::new(state.v.clone(), iota, state.eta.clone(), nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Boundary, Grid};

    fn one_sided(dim: usize, n: usize, h: f64) -> Grid {
        Grid::new(&vec![n; dim], &vec![h; dim], &vec![Boundary::OneSided; dim]).unwrap()
    }

    fn state(g: Grid, w: impl Fn([f64; 3]) -> f64 + Sync) -> SmecticState {
        SmecticState::new(
            VectorField::zeros(g, Vector),
            ScalarField::constant(g, 0.0).unwrap(),
            ScalarField::sample(g, w).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn flat_layers() {
        let g = one_sided(3, 6, 0.5);
        let m = SmecticModel::new(1.0, 0.5, 1e-8).unwrap();
        let st = state(g, |x| x[2]);
        let d = director(&st, &m).unwrap();
        assert!(d.flagged.is_empty());
        for c in 0..g.cell_count() {
            let n = d.n.at(c);
            assert!(n[0].abs() < 1e-14 && n[1].abs() < 1e-14 && (n[2] - 1.0).abs() < 1e-14);
        }
        let e = smectic_energy(&st, &m).unwrap();
        // only the entropic part e0 exp(0) = 1 remains
        assert!(e.values().iter().all(|&x| (x - 1.0).abs() < 1e-14));
        assert!(smectic_microstress(&st, &m).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn tilted_layers() {
        let g = one_sided(3, 5, 1.0);
        let m = SmecticModel::new(1.0, 1.0, 0.0).unwrap();
        let st = state(g, |x| 3.0 * (x[0] + x[2]));
        let d = director(&st, &m).unwrap();
        let r = 1.0 / 2f64.sqrt();
        for c in 0..g.cell_count() {
            let n = d.n.at(c);
            assert!((n[0] - r).abs() < 1e-14 && n[1].abs() < 1e-14 && (n[2] - r).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_compression() {
        let g = one_sided(3, 5, 0.5);
        let e = 0.2;
        let m = SmecticModel::new(3.0, 1.0, 0.0).unwrap();
        let st = state(g, |x| (1.0 + e) * x[2]);
        let en = smectic_energy(&st, &m).unwrap();
        assert!(en
            .values()
            .iter()
            .all(|&x| (x - 1.0 - 0.5 * 3.0 * e * e).abs() < 1e-13));
        let s = smectic_microstress(&st, &m).unwrap();
        for c in 0..g.cell_count() {
            let sc = s.at(c);
            assert!(sc[0].abs() < 1e-13 && sc[1].abs() < 1e-13 && (sc[2] - 3.0 * e).abs() < 1e-13);
        }
        let moving = SmecticState::new(
            VectorField::uniform(g, Vector, &[0.3, 0.1, 0.0]).unwrap(),
            st.eta().clone(),
            st.w().clone(),
        )
        .unwrap();
        let r = smectic_crocco(&moving, &m).unwrap();
        assert!(r.lhs.max_abs() < 1e-14);
        for name in Relation::Smectic.substructural_names() {
            assert!(r.term(name).unwrap().max_abs() < 1e-12, "{name}");
        }
    }

    #[test]
    fn radial_layers_flag_the_core() {
        let n = 41;
        let h = 0.05;
        let g = one_sided(2, n, h);
        let c0 = (n / 2) as f64 * h;
        let m = SmecticModel::new(1.0, 1.0, 1e-8).unwrap();
        let st = state(g, |x| ((x[0] - c0).powi(2) + (x[1] - c0).powi(2)).sqrt());
        let d = director(&st, &m).unwrap();
        let center = g.linear_index([n / 2, n / 2, 0]);
        assert_eq!(d.flagged, vec![center]);
        for c in 0..g.cell_count() {
            if c == center {
                continue;
            }
            let norm: f64 = d.n.at(c).iter().map(|x| x * x).sum::<f64>().sqrt();
            // |n| = 1 at every unflagged cell
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn projector_is_orthogonal_to_director() {
        let g = Grid::periodic(2, 32).unwrap();
        let m = SmecticModel::new(1.0, 2.0, 1e-8).unwrap();
        let st = state(g, |x| x[1] + 0.3 * x[0].sin());
        let l = layers(ops::grad_scalar(st.w()), m.eps_reg).unwrap();
        let gdn = ops::grad_scalar(&l.div_n);
        for c in 0..g.cell_count() {
            let n = l.dir.n.at(c);
            let u = gdn.at(c);
            let nu: f64 = n.iter().zip(u).map(|(a, b)| a * b).sum();
            let proj: Vec<f64> = u.iter().zip(n).map(|(ui, ni)| ui - ni * nu).collect();
            let dot: f64 = n.iter().zip(&proj).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-10);
        }
    }

    #[test]
    fn all_flagged_is_rejected() {
        let g = Grid::periodic(2, 8).unwrap();
        let m = SmecticModel::new(1.0, 1.0, 0.1).unwrap();
        let st = state(g, |_| 2.0);
        assert!(matches!(director(&st, &m), Err(Error::AllFlagged { .. })));
    }

    #[test]
    fn compressible_state_is_rejected_by_the_relation() {
        let g = Grid::periodic(2, 8).unwrap();
        let m = SmecticModel::new(1.0, 1.0, 0.0).unwrap();
        let st = state(g, |x| x[0].sin() + 2.0 * x[1].cos())
            .with_iota(ScalarField::constant(g, 1.0).unwrap())
            .unwrap();
        assert!(smectic_crocco(&st, &m).is_err());
        assert!(SmecticModel::new(0.0, 1.0, 0.0).is_err());
    }
}
