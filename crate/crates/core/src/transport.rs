//! Two-dimensional incompressible vorticity transport on a periodic square,
//! with the substructural alteration term `−curl(div T^E)` (ι ≡ 1).
//!
//! Vorticity–streamfunction form: `∇²ψ = −ω`, `v = (∂_y ψ, −∂_x ψ)` and
//! `∂_t ω = J(ψ, ω) − curl(div T^E)`, where `J(a, b) = a_x b_y − a_y b_x` is
//! the Arakawa Jacobian (so that `J(ψ, ω) = −(v·grad) ω`). Time stepping is
//! classical RK4.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{
    Field, Order, OrderField, Scalar, ScalarField, Tensor, TensorField, Vector, VectorField,
};
use crate::grid::Grid;
use crate::models::{gl_partials, ComplexFluidModel};
use crate::ops;
use crate::refine::{refinement_study_with_floor, ObservedOrder, RefinementReport};

pub const CFL_LIMIT: f64 = 0.5;
pub const POISSON_TOLERANCE: f64 = 1e-10;
/// Norms of curl(div T^E) below this are round-off: the operator is a second
/// difference, so its round-off grows like ε/h².
pub const POTENTIAL_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuMode {
    /// ν is held fixed in time.
    Frozen,
    /// ν is passively advected, `∂_t ν = −(v·grad) ν`.
    Advected,
}

impl NuMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NuMode::Frozen => "frozen",
            NuMode::Advected => "advected",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "frozen" => Some(NuMode::Frozen),
            "advected" => Some(NuMode::Advected),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportConfig {
    pub mode: NuMode,
    pub dt: f64,
    pub steps: usize,
    pub model: ComplexFluidModel,
    /// Diagnostics are recorded every this many steps (and at the end).
    pub diagnostics_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportState {
    pub omega: ScalarField,
    pub psi: ScalarField,
    pub nu: OrderField,
    pub t: f64,
}

fn check_grid(grid: &Grid) -> Result<()> {
    if grid.dim() != 2 {
        return Err(Error::DimMismatch {
            expected: 2,
            found: grid.dim(),
        });
    }
    let e = grid.extents();
    let h = grid.spacing();
    if !grid.is_periodic() || e[0] != e[1] || h[0] != h[1] {
        return Err(Error::InvalidGrid(
            "transport needs a periodic square grid with equal spacing".into(),
        ));
    }
    Ok(())
}

impl TransportState {
    /// Builds a state from ω and ν; ψ is obtained from the Poisson solve.
    pub fn new(omega: ScalarField, nu: OrderField, t: f64) -> Result<Self> {
        let grid = *omega.grid();
        check_grid(&grid)?;
        grid.check_same(nu.grid())?;
        let mean = omega.mean();
        if mean.abs() > 1e-10 * omega.max_abs().max(1.0) {
            return Err(Error::InvalidState(format!(
                "vorticity must have zero mean, got {mean:e}"
            )));
        }
        let psi = Poisson::new(&grid).solve(&omega)?;
        Ok(TransportState { omega, psi, nu, t })
    }

    pub fn velocity(&self) -> VectorField {
        velocity(&self.psi)
    }
}

fn velocity(psi: &ScalarField) -> VectorField {
    let grid = *psi.grid();
    let dx = ops::derivative(&grid, psi.values(), 1, 0);
    let dy = ops::derivative(&grid, psi.values(), 1, 1);
    Field::build(grid, Vector, |c, o| {
        o[0] = dy[c];
        o[1] = -dx[c];
    })
}

/// Direct solver for the periodic 5-point Poisson problem `∇²ψ = −ω` by FFT
/// diagonalisation.
struct Poisson {
    grid: Grid,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    eig: Vec<f64>,
}

impl Poisson {
    fn new(grid: &Grid) -> Self {
        let n = grid.extents()[0];
        let h = grid.spacing()[0];
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let one_d: Vec<f64> = (0..n)
            .map(|k| (2.0 * (std::f64::consts::TAU * k as f64 / n as f64).cos() - 2.0) / (h * h))
            .collect();
        let mut eig = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                eig[i * n + j] = one_d[i] + one_d[j];
            }
        }
        Poisson {
            grid: *grid,
            n,
            forward,
            inverse,
            eig,
        }
    }

    fn fft2(&self, buf: &mut [Complex<f64>], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        fft.process(buf);
        let mut col = vec![Complex::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = buf[i * n + j];
            }
            fft.process(&mut col);
            for i in 0..n {
                buf[i * n + j] = col[i];
            }
        }
    }

    fn solve(&self, omega: &ScalarField) -> Result<ScalarField> {
        let n = self.n;
        let mean = omega.mean();
        let mut buf: Vec<Complex<f64>> = omega
            .values()
            .iter()
            .map(|&w| Complex::new(w - mean, 0.0))
            .collect();
        self.fft2(&mut buf, &self.forward);
        for (k, b) in buf.iter_mut().enumerate() {
            *b = if k == 0 {
                Complex::new(0.0, 0.0)
            } else {
                -*b / self.eig[k]
            };
        }
        self.fft2(&mut buf, &self.inverse);
        let scale = 1.0 / (n * n) as f64;
        let psi = ScalarField::from_raw(
            self.grid,
            Scalar,
            buf.iter().map(|c| c.re * scale).collect(),
        );
        let residual = self.residual(&psi, omega, mean);
        if !(residual <= POISSON_TOLERANCE) {
            return Err(Error::Poisson {
                residual,
                tolerance: POISSON_TOLERANCE,
            });
        }
        Ok(psi)
    }

    /// `max |∇²ψ + (ω − mean ω)|` with the 5-point Laplacian.
    fn residual(&self, psi: &ScalarField, omega: &ScalarField, mean: f64) -> f64 {
        let n = self.n;
        let h2 = self.grid.spacing()[0].powi(2);
        let p = psi.values();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let c = i * n + j;
                let lap = (p[((i + 1) % n) * n + j]
                    + p[((i + n - 1) % n) * n + j]
                    + p[i * n + (j + 1) % n]
                    + p[i * n + (j + n - 1) % n]
                    - 4.0 * p[c])
                    / h2;
                worst = worst.max((lap + omega.values()[c] - mean).abs());
            }
        }
        worst
    }
}

/// Arakawa's energy- and enstrophy-conserving Jacobian `J(a, b)`.
pub fn arakawa_jacobian(a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
    let grid = *a.grid();
    check_grid(&grid)?;
    grid.check_same(b.grid())?;
    let n = grid.extents()[0];
    let d = grid.spacing()[0];
    let (p, w) = (a.values(), b.values());
    let at = |f: &[f64], i: usize, j: usize, di: isize, dj: isize| -> f64 {
        let ii = (i as isize + di).rem_euclid(n as isize) as usize;
        let jj = (j as isize + dj).rem_euclid(n as isize) as usize;
        f[ii * n + jj]
    };
    Ok(Field::build(grid, Scalar, |c, o| {
        let (i, j) = (c / n, c % n);
        let pp = |di, dj| at(p, i, j, di, dj);
        let ww = |di, dj| at(w, i, j, di, dj);
        let j1 = (pp(1, 0) - pp(-1, 0)) * (ww(0, 1) - ww(0, -1))
            - (pp(0, 1) - pp(0, -1)) * (ww(1, 0) - ww(-1, 0));
        let j2 = pp(1, 0) * (ww(1, 1) - ww(1, -1))
            - pp(-1, 0) * (ww(-1, 1) - ww(-1, -1))
            - pp(0, 1) * (ww(1, 1) - ww(-1, 1))
            + pp(0, -1) * (ww(1, -1) - ww(-1, -1));
        let j3 = ww(0, 1) * (pp(1, 1) - pp(-1, 1))
            - ww(0, -1) * (pp(1, -1) - pp(-1, -1))
            - ww(1, 0) * (pp(1, 1) - pp(1, -1))
            + ww(-1, 0) * (pp(-1, 1) - pp(-1, -1));
        o[0] = (j1 + j2 + j3) / (12.0 * d * d);
    }))
}

/// `T^E_ij = Σ_α ∂_i ν^α (∂_{grad ν} φ)_α^j` at ι ≡ 1, η ≡ 0.
pub fn ericksen_stress(nu: &OrderField, model: &ComplexFluidModel) -> Result<TensorField> {
    let grid = *nu.grid();
    let dim = grid.dim();
    let m = nu.m();
    let gnu = ops::order_grad(nu);
    let p = unit_partials(nu, &gnu, model)?;
    Ok(Field::build(grid, Tensor, |c, o| {
        let g = gnu.at(c);
        let pc = p.at(c);
        for i in 0..dim {
            for j in 0..dim {
                o[i * dim + j] = (0..m).map(|a| g[a * dim + i] * pc[a * dim + j]).sum();
            }
        }
    }))
}

fn unit_partials(
    nu: &OrderField,
    gnu: &crate::field::OrderGradField,
    model: &ComplexFluidModel,
) -> Result<crate::field::OrderGradField> {
    let grid = *nu.grid();
    let one = ScalarField::constant(grid, 1.0)?;
    let zero = ScalarField::constant(grid, 0.0)?;
    Ok(gl_partials(model, &one, nu, gnu, &zero)?.d_grad_nu)
}

fn check_planar(nu: &OrderField) -> Result<()> {
    if nu.dim() != 2 {
        return Err(Error::DimMismatch {
            expected: 2,
            found: nu.dim(),
        });
    }
    Ok(())
}

/// Alteration term `−curl(div T^E)` (ι ≡ 1).
pub fn transport_rhs(nu: &OrderField, model: &ComplexFluidModel) -> Result<ScalarField> {
    check_planar(nu)?;
    let div_te = ops::div_tensor(&ericksen_stress(nu, model)?);
    Ok(ops::curl_2d(&div_te)?.scale(-1.0))
}

/// The same term through the expansion
/// `(div T^E)_i = Σ ∂_i ν^α (div P)_α + Σ P_α^j ∂_i ∂_j ν^α`.
pub fn transport_rhs_expanded(nu: &OrderField, model: &ComplexFluidModel) -> Result<ScalarField> {
    check_planar(nu)?;
    let grid = *nu.grid();
    let dim = 2;
    let m = nu.m();
    let gnu = ops::order_grad(nu);
    let p = unit_partials(nu, &gnu, model)?;
    let div_p = ops::order_div(&p);
    let hess = ops::order_second_grad(nu);
    let div_te: VectorField = Field::build(grid, Vector, |c, o| {
        let g = gnu.at(c);
        let pc = p.at(c);
        let dp = div_p.at(c);
        let hs = hess.at(c);
        for (i, oi) in o.iter_mut().enumerate() {
            let mut s = 0.0;
            for a in 0..m {
                s += g[a * dim + i] * dp[a];
                for j in 0..dim {
                    s += pc[a * dim + j] * hs[(a * dim + j) * dim + i];
                }
            }
            *oi = s;
        }
    });
    Ok(ops::curl_2d(&div_te)?.scale(-1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// curl(div T^E) vanishes under refinement: vorticity is conserved.
    Conserving,
    /// curl(div T^E) stays bounded away from zero.
    Altering,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialCheck {
    pub curl_div_norm: f64,
}

/// `‖curl(div T^E)‖₂` of a 2-D or 3-D tensor field.
pub fn potential_condition_check(te: &TensorField) -> Result<PotentialCheck> {
    let d = ops::div_tensor(te);
    let curl_div_norm = match ops::curl_vector(&d) {
        ops::Curl::Planar(s) => s.norms().l2,
        ops::Curl::Spatial(v) => v.norms().l2,
    };
    Ok(PotentialCheck { curl_div_norm })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialStudy {
    pub report: RefinementReport,
    pub verdict: Verdict,
}

/// Decides the potential condition by refinement: conserving when the curl
/// norm converges to zero at order ≥ 1.5. Conditions (i) and (ii) both make
/// the alteration term vanish, so the curl norm is the only decision
/// variable.
pub fn potential_condition_study<F>(grids: &[Grid], make_stress: F) -> Result<PotentialStudy>
where
    F: Fn(&Grid) -> Result<TensorField>,
{
    let report = refinement_study_with_floor(grids, POTENTIAL_FLOOR, |g| {
        Ok(potential_condition_check(&make_stress(g)?)?.curl_div_norm)
    })?;
    let verdict = match report.observed_order {
        ObservedOrder::Exact => Verdict::Conserving,
        ObservedOrder::Slope(s) if s >= 1.5 => Verdict::Conserving,
        ObservedOrder::Slope(_) => Verdict::Altering,
    };
    Ok(PotentialStudy { report, verdict })
}

struct Integrator<'a> {
    config: &'a TransportConfig,
    poisson: Poisson,
}

impl Integrator<'_> {
    fn rhs(&self, nu: &OrderField) -> Result<Option<ScalarField>> {
        let r = transport_rhs(nu, &self.config.model)?;
        Ok(if r.values().iter().all(|&x| x == 0.0) {
            None
        } else {
            Some(r)
        })
    }

    fn tendency(
        &self,
        omega: &ScalarField,
        nu: &OrderField,
        frozen_rhs: Option<&Option<ScalarField>>,
        with_rhs: bool,
    ) -> Result<(ScalarField, Option<OrderField>)> {
        let psi = self.poisson.solve(omega)?;
        let mut d_omega = arakawa_jacobian(&psi, omega)?;
        if with_rhs {
            let owned;
            let rhs = match frozen_rhs {
                Some(r) => r,
                None => {
                    owned = self.rhs(nu)?;
                    &owned
                }
            };
            if let Some(r) = rhs {
                d_omega = d_omega.add(r)?;
            }
        }
        let d_nu = match self.config.mode {
            NuMode::Frozen => None,
            NuMode::Advected => Some(ops::advect_steady(nu, &velocity(&psi))?.scale(-1.0)),
        };
        Ok((d_omega, d_nu))
    }

    fn check_cfl(&self, state: &TransportState) -> Result<()> {
        let vmax = state.velocity().magnitude().max_abs();
        let cfl = vmax * self.config.dt / state.omega.grid().spacing()[0];
        if cfl > CFL_LIMIT {
            return Err(Error::Cfl {
                cfl,
                limit: CFL_LIMIT,
            });
        }
        Ok(())
    }

    fn step(&self, state: &TransportState, with_rhs: bool) -> Result<TransportState> {
        self.check_cfl(state)?;
        let dt = self.config.dt;
        let frozen = match self.config.mode {
            NuMode::Frozen if with_rhs => Some(self.rhs(&state.nu)?),
            _ => None,
        };
        let frozen = frozen.as_ref();
        let w0 = &state.omega;
        let n0 = &state.nu;
        let axpy = |base: &ScalarField, k: &ScalarField, s: f64| -> Result<ScalarField> {
            base.zip_map(k, |b, x| b + s * x)
        };
        let nu_axpy = |base: &OrderField, k: &Option<OrderField>, s: f64| -> Result<OrderField> {
            match k {
                Some(k) => base.zip_map(k, |b, x| b + s * x),
                None => Ok(base.clone()),
            }
        };
        let (k1, l1) = self.tendency(w0, n0, frozen, with_rhs)?;
        let (w1, n1) = (axpy(w0, &k1, 0.5 * dt)?, nu_axpy(n0, &l1, 0.5 * dt)?);
        let (k2, l2) = self.tendency(&w1, &n1, frozen, with_rhs)?;
        let (w2, n2) = (axpy(w0, &k2, 0.5 * dt)?, nu_axpy(n0, &l2, 0.5 * dt)?);
        let (k3, l3) = self.tendency(&w2, &n2, frozen, with_rhs)?;
        let (w3, n3) = (axpy(w0, &k3, dt)?, nu_axpy(n0, &l3, dt)?);
        let (k4, l4) = self.tendency(&w3, &n3, frozen, with_rhs)?;

        let omega = Field::build(*w0.grid(), Scalar, |c, o| {
            o[0] = w0.values()[c]
                + dt / 6.0
                    * (k1.values()[c]
                        + 2.0 * k2.values()[c]
                        + 2.0 * k3.values()[c]
                        + k4.values()[c]);
        });
        let nu = match (l1, l2, l3, l4) {
            (Some(a), Some(b), Some(c3), Some(d)) => {
                Field::build(*n0.grid(), Order(n0.m()), |c, o| {
                    for (k, ok) in o.iter_mut().enumerate() {
                        let idx = c * n0.m() + k;
                        *ok = n0.values()[idx]
                            + dt / 6.0
                                * (a.values()[idx]
                                    + 2.0 * b.values()[idx]
                                    + 2.0 * c3.values()[idx]
                                    + d.values()[idx]);
                    }
                })
            }
            _ => n0.clone(),
        };
        omega.check_finite("vorticity")?;
        let psi = self.poisson.solve(&omega)?;
        Ok(TransportState {
            omega,
            psi,
            nu,
            t: state.t + dt,
        })
    }
}

fn check_config(config: &TransportConfig, state: &TransportState) -> Result<()> {
    if !(config.dt.is_finite() && config.dt > 0.0) {
        return Err(Error::InvalidState(format!(
            "time step must be positive, got {}",
            config.dt
        )));
    }
    if config.model.m() != state.nu.m() {
        return Err(Error::OrderMismatch {
            expected: config.model.m(),
            found: state.nu.m(),
        });
    }
    Ok(())
}

/// One RK4 step of `∂_t ω = J(ψ, ω) − curl(div T^E)`.
pub fn step(state: &TransportState, config: &TransportConfig) -> Result<TransportState> {
    check_config(config, state)?;
    let it = Integrator {
        config,
        poisson: Poisson::new(state.omega.grid()),
    };
    it.step(state, true)
}

/// One RK4 step of pure advection, `∂_t ω = J(ψ, ω)`.
pub fn advection_step(state: &TransportState, config: &TransportConfig) -> Result<TransportState> {
    check_config(config, state)?;
    let it = Integrator {
        config,
        poisson: Poisson::new(state.omega.grid()),
    };
    it.step(state, false)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub t: f64,
    pub l2_omega: f64,
    pub max_omega: f64,
    /// `Σ ω² h²`
    pub enstrophy: f64,
    pub rhs_norm: f64,
    /// `−Σ v·div T^E h²`, the power exchanged with the substructure.
    pub te_work_rate: f64,
    /// Sign changes of ω between neighbouring cells; a proxy for
    /// topological transitions of the vorticity field.
    pub zero_crossings: usize,
}

pub const DIAGNOSTIC_COLUMNS: &[&str] = &[
    "t",
    "l2_omega",
    "max_omega",
    "enstrophy",
    "rhs_norm",
    "te_work_rate",
];

impl Diagnostics {
    /// Values in `DIAGNOSTIC_COLUMNS` order.
    pub fn row(&self) -> [f64; 6] {
        [
            self.t,
            self.l2_omega,
            self.max_omega,
            self.enstrophy,
            self.rhs_norm,
            self.te_work_rate,
        ]
    }
}

pub fn diagnostics(state: &TransportState, model: &ComplexFluidModel) -> Result<Diagnostics> {
    let grid = *state.omega.grid();
    let vol = grid.cell_volume();
    let w = state.omega.values();
    let enstrophy: f64 = w.iter().map(|x| x * x).sum::<f64>() * vol;
    let rhs = transport_rhs(&state.nu, model)?;
    let div_te = ops::div_tensor(&ericksen_stress(&state.nu, model)?);
    let v = state.velocity();
    let work: f64 = -v
        .values()
        .iter()
        .zip(div_te.values())
        .map(|(a, b)| a * b)
        .sum::<f64>()
        * vol;
    Ok(Diagnostics {
        t: state.t,
        l2_omega: enstrophy.sqrt(),
        max_omega: state.omega.max_abs(),
        enstrophy,
        rhs_norm: rhs.norms().l2,
        te_work_rate: work,
        zero_crossings: zero_crossings(&state.omega),
    })
}

fn zero_crossings(omega: &ScalarField) -> usize {
    let n = omega.grid().extents()[0];
    let w = omega.values();
    let mut count = 0;
    for i in 0..n {
        for j in 0..n {
            let c = w[i * n + j];
            if c * w[((i + 1) % n) * n + j] < 0.0 {
                count += 1;
            }
            if c * w[i * n + (j + 1) % n] < 0.0 {
                count += 1;
            }
        }
    }
    count
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportRun {
    pub series: Vec<Diagnostics>,
    pub final_state: TransportState,
}

/// Integrates `config.steps` steps, recording diagnostics at t = 0, every
/// `diagnostics_every` steps and at the end.
pub fn run(config: &TransportConfig, initial: TransportState) -> Result<TransportRun> {
    check_config(config, &initial)?;
    let it = Integrator {
        config,
        poisson: Poisson::new(initial.omega.grid()),
    };
    let every = config.diagnostics_every.max(1);
    let mut series = vec![diagnostics(&initial, &config.model)?];
    let mut state = initial;
    for k in 1..=config.steps {
        state = it.step(&state, true)?;
        if k % every == 0 || k == config.steps {
            series.push(diagnostics(&state, &config.model)?);
        }
    }
    Ok(TransportRun {
        series,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{EntropicPart, Gamma, MechanicalEnergy};

    fn model() -> ComplexFluidModel {
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
        .unwrap()
    }

    fn generic_nu(g: Grid) -> OrderField {
        OrderField::sample(g, 2, |x, o| {
            o[0] = x[0].sin() * x[1].sin() + 0.5 * (2.0 * x[1]).cos();
            o[1] = x[0].cos() + 0.3 * (2.0 * x[1]).sin();
        })
        .unwrap()
    }

    #[test]
    fn poisson_recovers_eigenfunction() {
        let g = Grid::periodic(2, 32).unwrap();
        let psi_exact = ScalarField::sample(g, |x| x[0].sin() * (2.0 * x[1]).cos()).unwrap();
        // ω = −∇²_h ψ with the 5-point Laplacian
        let h = g.spacing()[0];
        let lam = |k: f64| (2.0 * (k * h).cos() - 2.0) / (h * h);
        let omega = psi_exact.scale(-(lam(1.0) + lam(2.0)));
        let psi = Poisson::new(&g).solve(&omega).unwrap();
        assert!(psi.sub(&psi_exact).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn jacobian_is_antisymmetric_and_conservative() {
        let g = Grid::periodic(2, 16).unwrap();
        let a = ScalarField::sample(g, |x| x[0].sin() + 0.3 * (x[0] + 2.0 * x[1]).cos()).unwrap();
        let b = ScalarField::sample(g, |x| x[1].cos() * x[0].sin()).unwrap();
        let jab = arakawa_jacobian(&a, &b).unwrap();
        let jba = arakawa_jacobian(&b, &a).unwrap();
        assert!(jab.add(&jba).unwrap().max_abs() < 1e-13);
        // Σ b J(a, b) = 0 (enstrophy) and Σ a J(a, b) = 0 (energy)
        let sb: f64 = b
            .values()
            .iter()
            .zip(jab.values())
            .map(|(x, y)| x * y)
            .sum();
        let sa: f64 = a
            .values()
            .iter()
            .zip(jab.values())
            .map(|(x, y)| x * y)
            .sum();
        assert!(sb.abs() < 1e-12 && sa.abs() < 1e-12);
    }

    #[test]
    fn uniform_nu_has_zero_rhs() {
        let g = Grid::periodic(2, 16).unwrap();
        let nu = OrderField::uniform(g, Order(2), &[0.3, 0.7]).unwrap();
        assert_eq!(transport_rhs(&nu, &model()).unwrap().max_abs(), 0.0);
        let te = ericksen_stress(&nu, &model()).unwrap();
        assert_eq!(potential_condition_check(&te).unwrap().curl_div_norm, 0.0);
    }

    #[test]
    fn generic_nu_alters_and_routes_agree() {
        let g = Grid::periodic(2, 64).unwrap();
        let nu = generic_nu(g);
        let a = transport_rhs(&nu, &model()).unwrap();
        let b = transport_rhs_expanded(&nu, &model()).unwrap();
        assert!(a.norms().l2 > 0.5);
        assert!(a.sub(&b).unwrap().norms().l2 < 0.05 * a.norms().l2);
    }

    #[test]
    fn pure_advection_path_is_bitwise_when_rhs_vanishes() {
        let g = Grid::periodic(2, 16).unwrap();
        let omega =
            ScalarField::sample(g, |x| x[0].sin() * x[1].cos() + 0.2 * (2.0 * x[0]).cos()).unwrap();
        let nu = OrderField::uniform(g, Order(2), &[0.3, 0.7]).unwrap();
        let st = TransportState::new(omega, nu, 0.0).unwrap();
        let cfg = TransportConfig {
            mode: NuMode::Frozen,
            dt: 0.01,
            steps: 1,
            model: model(),
            diagnostics_every: 1,
        };
        let a = step(&st, &cfg).unwrap();
        let b = advection_step(&st, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cfl_violation_and_mean_check() {
        let g = Grid::periodic(2, 16).unwrap();
        let omega = ScalarField::sample(g, |x| 4.0 * x[0].sin() * x[1].sin()).unwrap();
        let st = TransportState::new(omega, generic_nu(g), 0.0).unwrap();
        let cfg = TransportConfig {
            mode: NuMode::Frozen,
            dt: 1.0,
            steps: 1,
            model: model(),
            diagnostics_every: 1,
        };
        assert!(matches!(step(&st, &cfg), Err(Error::Cfl { .. })));
        let biased = ScalarField::constant(g, 1.0).unwrap();
        assert!(TransportState::new(biased, generic_nu(g), 0.0).is_err());
    }

    #[test]
    fn advected_mode_moves_nu() {
        let g = Grid::periodic(2, 16).unwrap();
        let omega = ScalarField::sample(g, |x| x[0].sin() * x[1].sin()).unwrap();
        let st = TransportState::new(omega, generic_nu(g), 0.0).unwrap();
        let cfg = TransportConfig {
            mode: NuMode::Advected,
            dt: 0.05,
            steps: 3,
            model: model(),
            diagnostics_every: 1,
        };
        let r = run(&cfg, st.clone()).unwrap();
        assert_eq!(r.series.len(), 4);
        assert!(r.final_state.nu.sub(&st.nu).unwrap().max_abs() > 1e-4);
        assert!((r.final_state.t - 0.15).abs() < 1e-15);
    }
}
