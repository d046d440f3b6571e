//! Closed-form and ODE-generated states used as verification oracles, and
//! the named catalog the CLI resolves generator names against.

use std::f64::consts::{PI, TAU};

use crate::crocco::{ComplexState, KortewegState};
use crate::error::{Error, Result};
use crate::field::{Order, OrderField, ScalarField, VectorField};
use crate::grid::{Boundary, Grid};
use crate::models::{
    ComplexFluidModel, EntropicPart, Gamma, KortewegCoEnergy, KortewegModel, MechanicalEnergy,
    OrderCoEnergy,
};
use crate::smectic::{SmecticModel, SmecticState};

/// Smooth periodic Korteweg state with nonzero ω, ι̇ and grad η.
pub fn korteweg_trig_state(g: &Grid) -> Result<KortewegState> {
    let v = VectorField::sample(*g, |x| [x[1].sin() + 0.3, 0.5 * x[0].cos(), 0.0])?;
    let iota = ScalarField::sample(*g, |x| 1.0 + 0.2 * x[0].sin() * x[1].cos())?;
    let eta = ScalarField::sample(*g, |x| 0.3 * (x[0] + x[1]).sin())?;
    KortewegState::new(v, iota, eta)
}

/// One entry of the Korteweg defect-identity suite.
#[derive(Debug, Clone)]
pub struct KortewegCase {
    pub name: &'static str,
    pub model: KortewegModel,
    pub coenergy: Option<KortewegCoEnergy>,
}

impl KortewegCase {
    pub fn state(&self, g: &Grid) -> Result<KortewegState> {
        korteweg_trig_state(g)
    }
}

fn quadratic_korteweg(beta: f64) -> Result<KortewegModel> {
    KortewegModel::new(
        MechanicalEnergy::Quadratic { c: 2.0, iota0: 1.0 },
        EntropicPart::default(),
        beta,
    )
}

/// β > 0 without co-energy, β > 0 with κ₁ ≠ 0, and the β = 0 control.
pub fn korteweg_suite() -> Result<Vec<KortewegCase>> {
    Ok(vec![
        KortewegCase {
            name: "korteweg_capillary",
            model: quadratic_korteweg(0.7)?,
            coenergy: None,
        },
        KortewegCase {
            name: "korteweg_inertial",
            model: quadratic_korteweg(0.7)?,
            coenergy: Some(KortewegCoEnergy::new(1.0, 0.5)?),
        },
        KortewegCase {
            name: "classical_control",
            model: quadratic_korteweg(0.0)?,
            coenergy: None,
        },
    ])
}

/// Smooth periodic state with an m-component order parameter.
pub fn complex_trig_state(g: &Grid, m: usize) -> Result<ComplexState> {
    let v = VectorField::sample(*g, |x| [0.4 + x[1].sin(), 0.3 * x[0].cos(), 0.0])?;
    let iota = ScalarField::sample(*g, |x| 1.0 + 0.2 * x[0].cos() * x[1].sin())?;
    let eta = ScalarField::sample(*g, |x| 0.2 * x[0].sin())?;
    let nu = OrderField::sample(*g, m, |x, o| {
        for (a, oa) in o.iter_mut().enumerate() {
            let s = a as f64;
            *oa = 0.5 * (x[0] + s).sin() * x[1].cos() + 0.2 * ((1.0 + s) * x[1]).sin();
        }
    })?;
    ComplexState::new(v, iota, eta, nu)
}

#[derive(Debug, Clone)]
pub struct ComplexCase {
    pub name: &'static str,
    pub model: ComplexFluidModel,
    pub coenergy: Option<OrderCoEnergy>,
}

impl ComplexCase {
    pub fn state(&self, g: &Grid) -> Result<ComplexState> {
        complex_trig_state(g, self.model.m())
    }
}

/// m = 2 Ginzburg–Landau fluid with ι-coupled wells.
pub fn complex_gl_model() -> Result<ComplexFluidModel> {
    ComplexFluidModel::new(
        2,
        Gamma::Quadratic {
            k: 2.0,
            nu0: vec![0.1, -0.2],
            nu1: vec![0.3, 0.1],
        },
        MechanicalEnergy::Quadratic { c: 1.5, iota0: 1.0 },
        EntropicPart::default(),
        0.8,
        false,
    )
}

pub fn complex_coenergy() -> Result<OrderCoEnergy> {
    OrderCoEnergy::new(vec![1.5, 0.2, 0.2, 1.0], vec![0.3, -0.2])
}

pub fn complex_suite() -> Result<Vec<ComplexCase>> {
    let two_well = ComplexFluidModel::new(
        2,
        Gamma::TwoWell {
            c: 0.5,
            component: 0,
            w1: -0.5,
            w2: 0.5,
        },
        MechanicalEnergy::TwoWell {
            c: 1.0,
            iota1: 0.5,
            iota2: 1.5,
        },
        EntropicPart::new(0.5, 2.0)?,
        0.4,
        false,
    )?;
    Ok(vec![
        ComplexCase {
            name: "complex_gl",
            model: complex_gl_model()?,
            coenergy: None,
        },
        ComplexCase {
            name: "complex_gl_coenergy",
            model: complex_gl_model()?,
            coenergy: Some(complex_coenergy()?),
        },
        ComplexCase {
            name: "complex_two_well",
            model: two_well,
            coenergy: None,
        },
    ])
}

/// Parameters of the cancellation state: with `c = −β` the profile
/// `ι = ι0 + A cos y` solves `β ι'' = f'(ι)`, a mechanical equilibrium, while
/// `η = B sin y` stratifies the entropy. The flow is uniform, so ω × v = 0
/// and ϑ grad η is balanced by grad h and the Korteweg terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cancellation {
    pub beta: f64,
    pub iota0: f64,
    pub amplitude: f64,
    pub entropy_amplitude: f64,
    pub speed: f64,
}

impl Default for Cancellation {
    fn default() -> Self {
        Cancellation {
            beta: 0.5,
            iota0: 1.0,
            amplitude: 0.3,
            entropy_amplitude: 0.5,
            speed: 0.7,
        }
    }
}

impl Cancellation {
    pub fn model(&self) -> Result<KortewegModel> {
        KortewegModel::new(
            MechanicalEnergy::Quadratic {
                c: -self.beta,
                iota0: self.iota0,
            },
            EntropicPart::default(),
            self.beta,
        )
    }

    pub fn state(&self, g: &Grid) -> Result<KortewegState> {
        let u = self.speed;
        let v = VectorField::sample(*g, |_| [u, 0.0, 0.0])?;
        let iota = ScalarField::sample(*g, |x| self.iota0 + self.amplitude * x[1].cos())?;
        let eta = ScalarField::sample(*g, |x| self.entropy_amplitude * x[1].sin())?;
        KortewegState::new(v, iota, eta)
    }
}

/// Shear flow `v = (U(y), 0)` of an m = 1 Ginzburg–Landau fluid at uniform
/// η with ν(y), ι(y) solving the substructural balance
/// `(a ν'/ι)' = k ν/ι` and the transverse momentum balance
/// `c (ι − ι0) = a ν'²`. U is then fixed by `h_c = H0`, so every term of
/// the relation except the substructural ones vanishes and ω × v is
/// generated by ν alone. The profiles are integrated with RK4 at a step far
/// below the grid spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generation {
    pub a: f64,
    pub k: f64,
    pub c: f64,
    pub iota0: f64,
    pub eta: f64,
    pub nu_start: f64,
    pub slope_start: f64,
    /// `H0 − ξ(0)`, half the squared speed at y = 0.
    pub head: f64,
    /// Length of the non-periodic y-interval.
    pub length: f64,
}

/// Distance from the one-sided y-boundaries excluded from generation norms.
pub const GENERATION_MARGIN: f64 = 0.2;

impl Default for Generation {
    fn default() -> Self {
        Generation {
            a: 1.0,
            k: 1.0,
            c: 4.0,
            iota0: 1.0,
            eta: 0.1,
            nu_start: 0.5,
            slope_start: 0.3,
            head: 0.5,
            length: 1.0,
        }
    }
}

impl Generation {
    pub fn model(&self) -> Result<ComplexFluidModel> {
        ComplexFluidModel::new(
            1,
            Gamma::Quadratic {
                k: self.k,
                nu0: vec![0.0],
                nu1: vec![0.0],
            },
            MechanicalEnergy::Quadratic {
                c: self.c,
                iota0: self.iota0,
            },
            EntropicPart::default(),
            self.a,
            false,
        )
    }

    /// Four periodic cells in x, `n + 1` one-sided nodes across y.
    pub fn grid(&self, n: usize) -> Result<Grid> {
        let h = self.length / n as f64;
        Grid::new(
            &[4, n + 1],
            &[h, h],
            &[Boundary::Periodic, Boundary::OneSided],
        )
    }

    fn iota_of(&self, slope: f64) -> f64 {
        self.iota0 + self.a * slope * slope / self.c
    }

    fn rhs(&self, y: [f64; 2]) -> [f64; 2] {
        let [nu, s] = y;
        let iota = self.iota_of(s);
        let denom = self.a * (1.0 - 2.0 * self.a * s * s / (self.c * iota));
        [s, self.k * nu / denom]
    }

    /// `(ν, ν')` at `y = j·h` for `j = 0..=n`.
    fn profile(&self, n: usize) -> Vec<[f64; 2]> {
        const SUBSTEPS: usize = 64;
        let dy = self.length / (n * SUBSTEPS) as f64;
        let mut y = [self.nu_start, self.slope_start];
        let mut out = Vec::with_capacity(n + 1);
        out.push(y);
        let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
        for _ in 0..n {
            for _ in 0..SUBSTEPS {
                let k1 = self.rhs(y);
                let k2 = self.rhs(add(y, k1, 0.5 * dy));
                let k3 = self.rhs(add(y, k2, 0.5 * dy));
                let k4 = self.rhs(add(y, k3, dy));
                for i in 0..2 {
                    y[i] += dy / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            out.push(y);
        }
        out
    }

    /// `ξ = φ − ι∂_ιφ − ν∂_νφ − ∂_{grad ν}φ · grad ν` along the profile.
    fn xi(&self, model: &ComplexFluidModel, nu: f64, slope: f64) -> f64 {
        let iota = self.iota_of(slope);
        let phi = model.energy(iota, &[nu], &[0.0, slope], self.eta);
        let mut dn = [0.0];
        model.d_nu(iota, &[nu], &mut dn);
        phi - iota * model.d_iota(iota, &[nu]) - nu * dn[0] - self.a * slope * slope
    }

    /// The state on `g`, which must come from [`Generation::grid`].
    pub fn state(&self, g: &Grid) -> Result<ComplexState> {
        let n = g.extents()[1]
            .checked_sub(1)
            .filter(|&n| n > 0 && g.dim() == 2)
            .ok_or_else(|| Error::InvalidGrid("generation state needs a 2-D grid".into()))?;
        if (g.spacing()[1] * n as f64 - self.length).abs() > 1e-12 {
            return Err(Error::InvalidGrid(
                "generation grid must span the profile length".into(),
            ));
        }
        let model = self.model()?;
        let prof = self.profile(n);
        let h0 = self.xi(&model, prof[0][0], prof[0][1]) + self.head;
        let mut speed = Vec::with_capacity(n + 1);
        for p in &prof {
            let q2 = 2.0 * (h0 - self.xi(&model, p[0], p[1]));
            if q2 <= 0.0 {
                return Err(Error::InvalidState(
                    "generation head too small for a real speed".into(),
                ));
            }
            speed.push(q2.sqrt());
        }
        let row = |x: [f64; 3]| (x[1] / g.spacing()[1]).round() as usize;
        let v = VectorField::sample(*g, |x| [speed[row(x)], 0.0, 0.0])?;
        let iota = ScalarField::sample(*g, |x| self.iota_of(prof[row(x)][1]))?;
        let eta = ScalarField::constant(*g, self.eta)?;
        let nu = OrderField::sample(*g, 1, |x, o| o[0] = prof[row(x)][0])?;
        ComplexState::new(v, iota, eta, nu)
    }
}

/// Incompressible smectic state on the unit square with wavy layers and a
/// rotational flow; layers never degenerate (|grad w| ≥ 0.5).
pub fn smectic_wavy_state(g: &Grid) -> Result<SmecticState> {
    let v = VectorField::sample(*g, |x| {
        [(PI * x[1]).sin() + 0.2, 0.3 * (PI * x[0]).cos(), 0.0]
    })?;
    let eta = ScalarField::sample(*g, |x| 0.2 * (PI * x[0]).sin() * x[1])?;
    let w = ScalarField::sample(*g, |x| x[1] + 0.1 * (TAU * x[0]).sin() + 0.05 * x[0] * x[1])?;
    SmecticState::new(v, eta, w)
}

pub fn smectic_model() -> Result<SmecticModel> {
    SmecticModel::new(1.0, 0.5, 1e-8)
}

/// One-sided square grid on `[0, 1]²` with `n + 1` nodes per side.
pub fn unit_square(n: usize) -> Result<Grid> {
    let h = 1.0 / n as f64;
    Grid::new(&[n + 1, n + 1], &[h, h], &[Boundary::OneSided; 2])
}

/// Generic two-component ν whose Ericksen stress is not a potential
/// gradient, so the transport term alters vorticity.
pub fn transport_generic_nu(g: &Grid) -> Result<OrderField> {
    OrderField::sample(*g, 2, |x, o| {
        o[0] = x[0].sin() * x[1].sin() + 0.5 * (2.0 * x[1]).cos();
        o[1] = x[0].cos() + 0.3 * (2.0 * x[1]).sin();
    })
}

/// Each component a single Laplacian eigenfunction: `Δν^α grad ν^α` is then a
/// gradient and curl(div T^E) vanishes in the continuum.
pub fn transport_eigen_nu(g: &Grid) -> Result<OrderField> {
    OrderField::sample(*g, 2, |x, o| {
        o[0] = x[0].sin() * x[1].sin();
        o[1] = (2.0 * x[0]).cos();
    })
}

pub fn transport_uniform_nu(g: &Grid) -> Result<OrderField> {
    OrderField::uniform(*g, Order(2), &[0.3, -0.4])
}

/// Taylor–Green vorticity, a discrete steady state of pure advection.
pub fn taylor_green_omega(g: &Grid) -> Result<ScalarField> {
    ScalarField::sample(*g, |x| 2.0 * x[0].sin() * x[1].sin())
}

/// Non-stationary zero-mean vorticity with interacting modes.
pub fn mixed_omega(g: &Grid) -> Result<ScalarField> {
    ScalarField::sample(*g, |x| {
        x[0].sin() * x[1].sin() + 0.6 * (2.0 * x[0] + x[1]).cos() + 0.4 * (x[0] - 3.0 * x[1]).sin()
    })
}

/// m = 2 Ginzburg–Landau model for transport runs (pure gradient energy).
pub fn transport_model() -> Result<ComplexFluidModel> {
    ComplexFluidModel::new(
        2,
        Gamma::Quadratic {
            k: 0.0,
            nu0: vec![0.0; 2],
            nu1: vec![0.0; 2],
        },
        MechanicalEnergy::Quadratic { c: 1.0, iota0: 1.0 },
        EntropicPart::default(),
        1.0,
        false,
    )
}

pub const KORTEWEG_GENERATORS: &[&str] = &["korteweg_trig", "cancellation"];
pub const COMPLEX_GENERATORS: &[&str] = &["complex_trig", "generation"];
pub const SMECTIC_GENERATORS: &[&str] = &["smectic_wavy"];
pub const NU_GENERATORS: &[&str] = &["uniform", "generic", "eigen"];
pub const OMEGA_GENERATORS: &[&str] = &["taylor_green", "mixed", "zero"];

fn unknown(kind: &str, name: &str, known: &[&str]) -> Error {
    Error::UnknownGenerator(format!(
        "{kind} generator {name:?} (known: {})",
        known.join(", ")
    ))
}

pub fn korteweg_state(name: &str, g: &Grid) -> Result<KortewegState> {
    match name {
        "korteweg_trig" => korteweg_trig_state(g),
        "cancellation" => Cancellation::default().state(g),
        _ => Err(unknown("korteweg", name, KORTEWEG_GENERATORS)),
    }
}

pub fn complex_state(name: &str, g: &Grid, m: usize) -> Result<ComplexState> {
    match name {
        "complex_trig" => complex_trig_state(g, m),
        "generation" => Generation::default().state(g),
        _ => Err(unknown("complex", name, COMPLEX_GENERATORS)),
    }
}

pub fn smectic_state(name: &str, g: &Grid) -> Result<SmecticState> {
    match name {
        "smectic_wavy" => smectic_wavy_state(g),
        _ => Err(unknown("smectic", name, SMECTIC_GENERATORS)),
    }
}

pub fn nu_field(name: &str, g: &Grid) -> Result<OrderField> {
    match name {
        "uniform" => transport_uniform_nu(g),
        "generic" => transport_generic_nu(g),
        "eigen" => transport_eigen_nu(g),
        _ => Err(unknown("order-parameter", name, NU_GENERATORS)),
    }
}

pub fn omega_field(name: &str, g: &Grid) -> Result<ScalarField> {
    match name {
        "taylor_green" => taylor_green_omega(g),
        "mixed" => mixed_omega(g),
        "zero" => ScalarField::constant(*g, 0.0),
        _ => Err(unknown("vorticity", name, OMEGA_GENERATORS)),
    }
}
