//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain
//! binary so the lines always reach the test log.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use crocco_core::crocco::{
    classical_crocco, complex_crocco, complex_defect_identity, complex_momentum_residual,
    corollary_check, defect_identity, korteweg_crocco, korteweg_enthalpy, steady_momentum_residual,
    substructural_balance_residual, ComplexState, CorollaryMode, CroccoReport, Relation,
};
use crocco_core::manufactured::{
    complex_suite, korteweg_suite, korteweg_trig_state, mixed_omega, smectic_model,
    smectic_wavy_state, transport_eigen_nu, transport_generic_nu, transport_model,
    transport_uniform_nu, unit_square, Cancellation, Generation, GENERATION_MARGIN,
};
use crocco_core::models::{
    catalog, validate_partials, ComplexFluidModel, EntropicPart, Gamma, KortewegModel,
    MechanicalEnergy, DEFAULT_POINTS, DEFAULT_SEED, FD_TOLERANCE,
};
use crocco_core::ops;
use crocco_core::smectic::{embed, smectic_crocco, SmecticPotential};
use crocco_core::transport::{
    ericksen_stress, potential_condition_study, run, step, transport_rhs, transport_rhs_expanded,
    NuMode, TransportConfig, TransportState, Verdict,
};
use crocco_core::{
    Boundary, Grid, Order, OrderField, RefinementReport, ScalarField, Tensor, TensorField,
    VectorField,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

const MIN_ORDER: f64 = 1.8;

fn periodic(ns: &[usize]) -> Vec<Grid> {
    ns.iter().map(|&n| Grid::periodic(2, n).unwrap()).collect()
}

fn study(
    grids: &[Grid],
    probe: impl Fn(&Grid) -> crocco_core::Result<f64>,
) -> crocco_core::Result<RefinementReport> {
    crocco_core::refine::refinement_study(grids, probe)
}

fn order_ok(r: &RefinementReport) -> bool {
    r.observed_order.at_least(MIN_ORDER)
}

fn describe(label: &str, r: &RefinementReport) -> String {
    format!(
        "{label} order {} (finest {:.2e})",
        r.observed_order,
        r.finest_error()
    )
}

// 1. Operator order and exactness on linear fields.
fn operators() -> Outcome {
    let grids = periodic(&[32, 64, 128]);
    let f = |x: [f64; 3]| x[0].sin() * (2.0 * x[1]).cos();
    let u = |x: [f64; 3]| [x[1].sin() * x[0].cos(), (x[0] + x[1]).cos(), 0.0];

    let grad = study(&grids, |g| {
        let exact = VectorField::sample(*g, |x| {
            [
                x[0].cos() * (2.0 * x[1]).cos(),
                -2.0 * x[0].sin() * (2.0 * x[1]).sin(),
                0.0,
            ]
        })?;
        Ok(ops::grad_scalar(&ScalarField::sample(*g, f)?)
            .sub(&exact)?
            .norms()
            .linf)
    })?;
    let div = study(&grids, |g| {
        let exact = ScalarField::sample(*g, |x| -x[1].sin() * x[0].sin() - (x[0] + x[1]).sin())?;
        Ok(ops::div_vector(&VectorField::sample(*g, u)?)
            .sub(&exact)?
            .norms()
            .linf)
    })?;
    let curl = study(&grids, |g| {
        // ∂x u_y − ∂y u_x
        let exact = ScalarField::sample(*g, |x| -(x[0] + x[1]).sin() - x[1].cos() * x[0].cos())?;
        Ok(ops::curl_2d(&VectorField::sample(*g, u)?)?
            .sub(&exact)?
            .norms()
            .linf)
    })?;
    let hess = study(&grids, |g| {
        let exact = TensorField::from_fn(*g, Tensor, |x, o| {
            let (s, c) = (x[0].sin(), x[0].cos());
            let (s2, c2) = ((2.0 * x[1]).sin(), (2.0 * x[1]).cos());
            o.copy_from_slice(&[-s * c2, -2.0 * c * s2, -2.0 * c * s2, -4.0 * s * c2]);
        })?;
        let h = ops::grad_vector(&ops::grad_scalar(&ScalarField::sample(*g, f)?));
        Ok(h.sub(&exact)?.norms().linf)
    })?;

    let g = Grid::new(&[9, 7], &[0.25, 0.5], &[Boundary::OneSided; 2])?;
    let lin = ScalarField::sample(g, |x| 1.0 + 2.0 * x[0] - 3.0 * x[1])?;
    let lin_v = VectorField::sample(g, |x| [0.5 * x[0] + x[1], 2.0 * x[0] - x[1], 0.0])?;
    let linear_err = [
        ops::grad_scalar(&lin)
            .sub(&VectorField::uniform(g, crocco_core::Vector, &[2.0, -3.0])?)?
            .max_abs(),
        (ops::div_vector(&lin_v).sub(&ScalarField::constant(g, -0.5)?)?).max_abs(),
        (ops::curl_2d(&lin_v)?.sub(&ScalarField::constant(g, 1.0)?)?).max_abs(),
        ops::grad_vector(&ops::grad_scalar(&lin)).max_abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let pass = [&grad, &div, &curl, &hess].iter().all(|r| order_ok(r)) && linear_err <= 1e-12;
    Ok((
        pass,
        format!(
            "{}, {}, {}, {}, linear error {linear_err:.1e}",
            describe("grad", &grad),
            describe("div", &div),
            describe("curl", &curl),
            describe("hessian", &hess)
        ),
    ))
}

fn quadratic_korteweg(beta: f64) -> KortewegModel {
    KortewegModel::new(
        MechanicalEnergy::Quadratic { c: 2.0, iota0: 1.0 },
        EntropicPart::default(),
        beta,
    )
    .unwrap()
}

fn max_term_difference(a: &CroccoReport, b: &CroccoReport, names: &[&str]) -> f64 {
    names
        .iter()
        .map(|n| {
            a.term(n)
                .unwrap()
                .sub(b.term(n).unwrap())
                .unwrap()
                .max_abs()
        })
        .fold(0.0, f64::max)
}

// 2. Classical reduction.
fn classical_reduction() -> Outcome {
    let g = Grid::periodic(2, 64)?;
    let st = korteweg_trig_state(&g)?;
    let m = quadratic_korteweg(0.0);
    let k = korteweg_crocco(&st, &m, None)?;
    let c = classical_crocco(&st, &m)?;
    let diff =
        max_term_difference(&k, &c, &["thermo", "enthalpy"]).max(k.lhs.sub(&c.lhs)?.max_abs());
    let sub = k
        .term("wall")
        .unwrap()
        .max_abs()
        .max(k.term("inertia").unwrap().max_abs());
    Ok((
        diff <= 1e-12 && sub == 0.0,
        format!("max term difference {diff:.1e}, substructural max {sub:.1e}"),
    ))
}

// 3. Korteweg defect identity.
fn korteweg_defect() -> Outcome {
    let grids = periodic(&[32, 64, 128]);
    let mut pass = true;
    let mut parts = vec![];
    for case in korteweg_suite()? {
        let r = defect_identity(&grids, &case.model, case.coenergy.as_ref(), |g| {
            case.state(g)
        })?;
        pass &= order_ok(&r);
        parts.push(describe(case.name, &r));
    }
    Ok((pass, parts.join(", ")))
}

// 4. Complex-fluid defect identity.
fn complex_defect() -> Outcome {
    let grids = periodic(&[32, 64, 128]);
    let mut pass = true;
    let mut parts = vec![];
    for case in complex_suite()? {
        let r = complex_defect_identity(&grids, &case.model, case.coenergy.as_ref(), |g| {
            case.state(g)
        })?;
        pass &= order_ok(&r);
        parts.push(describe(case.name, &r));
    }
    Ok((pass, parts.join(", ")))
}

fn as_order_state(st: &crocco_core::crocco::KortewegState) -> crocco_core::Result<ComplexState> {
    let nu = OrderField::from_vec(*st.grid(), Order(1), st.iota().values().to_vec())?;
    ComplexState::new(st.v().clone(), st.iota().clone(), st.eta().clone(), nu)
}

/// `Σ_α ν^α grad(ι B_α)` for an m = 1 state.
fn balance_correction(st: &ComplexState, b: &OrderField) -> crocco_core::Result<VectorField> {
    let ib = OrderField::from_vec(
        *st.grid(),
        Order(1),
        b.values()
            .iter()
            .zip(st.iota().values())
            .map(|(x, i)| x * i)
            .collect(),
    )?;
    let g = ops::order_grad(&ib);
    let gv = VectorField::from_vec(*st.grid(), crocco_core::Vector, g.values().to_vec())?;
    Ok(gv.mul_scalar(&ScalarField::from_vec(
        *st.grid(),
        crocco_core::Scalar,
        st.nu().values().to_vec(),
    )?)?)
}

fn substructural(r: &CroccoReport) -> crocco_core::Result<VectorField> {
    r.substructural_sum()
}

// 5. Reduction chain.
fn reduction_chain() -> Outcome {
    let km = quadratic_korteweg(0.7);
    let cm = ComplexFluidModel::korteweg_reduction(&km);

    let g = Grid::periodic(2, 64)?;
    let ks = korteweg_trig_state(&g)?;
    let cs = as_order_state(&ks)?;
    let kr = korteweg_crocco(&ks, &km, None)?;
    let cr = complex_crocco(&cs, &cm, None)?;
    let shared =
        max_term_difference(&kr, &cr, &["thermo", "enthalpy"]).max(kr.lhs.sub(&cr.lhs)?.max_abs());
    let literal = substructural(&kr)?.sub(&substructural(&cr)?)?.max_abs();

    // sub_K − sub_c = (R_c + Σ ν grad(ι B)) − R_K up to truncation error
    let grids = periodic(&[32, 64, 128]);
    let corrected = study(&grids, |g| {
        let ks = korteweg_trig_state(g)?;
        let cs = as_order_state(&ks)?;
        let d = substructural(&korteweg_crocco(&ks, &km, None)?)?
            .sub(&substructural(&complex_crocco(&cs, &cm, None)?)?)?;
        let b = substructural_balance_residual(&cs, &cm, None)?;
        let predicted = complex_momentum_residual(&cs, &cm)?
            .add(&balance_correction(&cs, &b)?)?
            .sub(&steady_momentum_residual(&ks, &km, None)?)?;
        Ok(d.sub(&predicted)?.norms().linf)
    })?;

    let sm = smectic_model()?;
    let pot = SmecticPotential {
        model: sm,
        compressible: false,
    };
    let sgrids: Vec<Grid> = [32, 64, 128]
        .iter()
        .map(|&n| unit_square(n).unwrap())
        .collect();
    let smectic = study(&sgrids, |g| {
        let st = smectic_wavy_state(g)?;
        let a = smectic_crocco(&st, &sm)?;
        let b = complex_crocco(&embed(&st)?, &pot, None)?;
        let mut worst: f64 = a.lhs.sub(&b.lhs)?.interior_norms(0.2).linf;
        for n in Relation::Smectic.term_names() {
            let d = a.term(n).unwrap().sub(b.term(n).unwrap())?;
            worst = worst.max(d.interior_norms(0.2).linf);
        }
        Ok(worst)
    })?;

    let pass = shared <= 1e-10 && order_ok(&corrected) && order_ok(&smectic);
    Ok((
        pass,
        format!(
            "shared fields {shared:.1e}; literal substructural gap {literal:.2e} (not asserted); {}; {}",
            describe("corrected", &corrected),
            describe("smectic vs complex", &smectic)
        ),
    ))
}

// 6. Cancellation scenario.
fn cancellation() -> Outcome {
    let c = Cancellation::default();
    let m = c.model()?;
    let grids = periodic(&[32, 64, 128]);
    let mut thermo_min = f64::INFINITY;
    let mut lamb = vec![];
    let mut imb = vec![];
    for g in &grids {
        let r = korteweg_crocco(&c.state(g)?, &m, None)?;
        thermo_min = thermo_min.min(r.term("thermo").unwrap().max_abs());
        lamb.push((g.max_spacing(), r.lhs.max_abs()));
        imb.push((
            g.max_spacing(),
            corollary_check(&r, CorollaryMode::Cancellation)?.norms.linf,
        ));
    }
    let lamb = RefinementReport::from_levels(lamb)?;
    let imb = RefinementReport::from_levels(imb)?;
    Ok((
        thermo_min > 0.1 && order_ok(&lamb) && order_ok(&imb),
        format!(
            "min ‖ϑ grad η‖∞ {thermo_min:.3}, {}, {}",
            describe("imbalance", &imb),
            describe("ω×v", &lamb)
        ),
    ))
}

// 7. Generation scenario.
fn generation() -> Outcome {
    let gen = Generation::default();
    let m = gen.model()?;
    let mut levels = vec![];
    let mut lamb_min = f64::INFINITY;
    let mut thermo_max: f64 = 0.0;
    for n in [64, 128, 256] {
        let g = gen.grid(n)?;
        let r = complex_crocco(&gen.state(&g)?, &m, None)?;
        lamb_min = lamb_min.min(r.lhs.interior_norms(GENERATION_MARGIN).linf);
        thermo_max = thermo_max.max(r.term("thermo").unwrap().max_abs());
        let check = corollary_check(&r, CorollaryMode::Generation)?;
        levels.push((
            g.max_spacing(),
            check.imbalance.interior_norms(GENERATION_MARGIN).linf,
        ));
    }
    let r = RefinementReport::from_levels(levels)?;
    Ok((
        lamb_min > 0.01 && thermo_max <= 1e-12 && order_ok(&r),
        format!(
            "min ‖ω×v‖∞ {lamb_min:.3}, thermo max {thermo_max:.1e}, {}",
            describe("ω×v − substructural", &r)
        ),
    ))
}

// 8. Dual-route checks.
fn dual_routes() -> Outcome {
    let grids = periodic(&[32, 64, 128]);
    let km = quadratic_korteweg(0.7);
    let ce = crocco_core::models::KortewegCoEnergy::new(1.0, 0.5)?;
    let enthalpy = study(&grids, |g| {
        let e = korteweg_enthalpy(&korteweg_trig_state(g)?, &km, Some(&ce))?;
        Ok(e.xi.sub(&e.xi_pressure)?.norms().linf)
    })?;
    let tm = transport_model()?;
    let divergence = study(&grids, |g| {
        let nu = transport_generic_nu(g)?;
        Ok(transport_rhs(&nu, &tm)?
            .sub(&transport_rhs_expanded(&nu, &tm)?)?
            .norms()
            .linf)
    })?;
    let product = study(&grids, |g| {
        let gi = |x: [f64; 3]| [x[0].cos() * x[1].cos(), -x[0].sin() * x[1].sin()];
        let w = VectorField::sample(*g, |x| [(2.0 * x[1]).sin(), x[0].cos() + 0.5, 0.0])?;
        let t = TensorField::from_fn(*g, Tensor, |x, o| {
            let a = gi(x);
            let b = [(2.0 * x[1]).sin(), x[0].cos() + 0.5];
            for i in 0..2 {
                for j in 0..2 {
                    o[i * 2 + j] = a[i] * b[j];
                }
            }
        })?;
        let grad_iota = VectorField::sample(*g, |x| {
            let a = gi(x);
            [a[0], a[1], 0.0]
        })?;
        let hess = ops::grad_vector(&grad_iota);
        let divw = ops::div_vector(&w);
        let mut vals = vec![0.0; g.cell_count() * 2];
        for c in 0..g.cell_count() {
            for i in 0..2 {
                vals[c * 2 + i] = divw.value(c) * grad_iota.at(c)[i]
                    + (0..2)
                        .map(|j| hess.at(c)[i * 2 + j] * w.at(c)[j])
                        .sum::<f64>();
            }
        }
        let rhs = VectorField::from_vec(*g, crocco_core::Vector, vals)?;
        Ok(ops::div_tensor(&t).sub(&rhs)?.norms().linf)
    })?;
    Ok((
        order_ok(&enthalpy) && order_ok(&divergence) && order_ok(&product),
        format!(
            "{}, {}, {}",
            describe("enthalpy routes", &enthalpy),
            describe("divergence expansion", &divergence),
            describe("product rule", &product)
        ),
    ))
}

fn cfl_dt(state: &TransportState, cfl: f64) -> f64 {
    cfl * state.omega.grid().spacing()[0] / state.velocity().magnitude().max_abs()
}

fn enstrophy_drift(state: &TransportState, config: &TransportConfig) -> crocco_core::Result<f64> {
    let r = run(config, state.clone())?;
    let z0 = r.series.first().unwrap().enstrophy;
    let z1 = r.series.last().unwrap().enstrophy;
    Ok((z1 - z0).abs() / z0)
}

// 9. Transport.
fn transport() -> Outcome {
    let g = Grid::periodic(2, 64)?;
    let model = transport_model()?;
    let uniform = TransportState::new(mixed_omega(&g)?, transport_uniform_nu(&g)?, 0.0)?;
    let dt = cfl_dt(&uniform, 0.25);
    let config = |dt: f64, steps: usize| TransportConfig {
        mode: NuMode::Frozen,
        dt,
        steps,
        model: model.clone(),
        diagnostics_every: steps,
    };
    let drift = enstrophy_drift(&uniform, &config(dt, 1000))?;
    let drift_half = enstrophy_drift(&uniform, &config(0.5 * dt, 2000))?;
    let shrink = drift / drift_half;

    let generic = TransportState::new(mixed_omega(&g)?, transport_generic_nu(&g)?, 0.0)?;
    let change = enstrophy_drift(&generic, &config(dt, 20))?;

    let still = TransportState::new(
        ScalarField::constant(g, 0.0)?,
        transport_generic_nu(&g)?,
        0.0,
    )?;
    let rhs = transport_rhs(&still.nu, &model)?;
    let first_step = |dt: f64| -> crocco_core::Result<f64> {
        let next = step(&still, &config(dt, 1))?;
        Ok(next.omega.scale(1.0 / dt).sub(&rhs)?.max_abs() / rhs.max_abs())
    };
    let e1 = first_step(0.02)?;
    let e2 = first_step(0.01)?;

    let grids = periodic(&[32, 64, 128]);
    let eigen =
        potential_condition_study(&grids, |g| ericksen_stress(&transport_eigen_nu(g)?, &model))?;
    let altering = potential_condition_study(&grids, |g| {
        ericksen_stress(&transport_generic_nu(g)?, &model)
    })?;

    let pass = drift < 1e-5
        && shrink >= 8.0
        && change >= 10.0 * drift
        && e1 < 0.02
        && e2 <= e1
        && eigen.verdict == Verdict::Conserving
        && order_ok(&eigen.report)
        && altering.verdict == Verdict::Altering;
    Ok((
        pass,
        format!(
            "drift {drift:.2e}, halved-step shrink {shrink:.1}x, generic change {change:.2e}, \
             first-step error {e1:.1e}/{e2:.1e}, {}, generic verdict {:?}",
            describe("condition (i)", &eigen.report),
            altering.verdict
        ),
    ))
}

fn rotation(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    if dim == 2 {
        let t = rng.random_range(0.0..TAU);
        return vec![t.cos(), -t.sin(), t.sin(), t.cos()];
    }
    // unit quaternion
    let mut q = [0.0f64; 4];
    for x in &mut q {
        *x = rng.random_range(-1.0..1.0);
    }
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    vec![
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - z * w),
        2.0 * (x * z + y * w),
        2.0 * (x * y + z * w),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - x * w),
        2.0 * (x * z - y * w),
        2.0 * (y * z + x * w),
        1.0 - 2.0 * (x * x + y * y),
    ]
}

fn rotate_rows(q: &[f64], g: &[f64], dim: usize) -> Vec<f64> {
    g.chunks(dim)
        .flat_map(|row| {
            (0..dim).map(move |i| (0..dim).map(|j| q[i * dim + j] * row[j]).sum::<f64>())
        })
        .collect()
}

// 10. Model validation and objectivity.
fn validation() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for law in catalog() {
        let r = validate_partials(law.as_ref(), DEFAULT_POINTS, DEFAULT_SEED);
        worst = worst.max(r.max_rel_error);
        pass &= r.passed();
    }
    pass &= worst < FD_TOLERANCE;

    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let km = quadratic_korteweg(0.7);
    let cm = ComplexFluidModel::new(
        2,
        Gamma::Quadratic {
            k: 1.5,
            nu0: vec![0.1, 0.0],
            nu1: vec![0.2, -0.3],
        },
        MechanicalEnergy::Quadratic { c: 2.0, iota0: 1.0 },
        EntropicPart::default(),
        0.7,
        false,
    )?;
    let mut objectivity: f64 = 0.0;
    for _ in 0..200 {
        for dim in [2, 3] {
            let q = rotation(&mut rng, dim);
            let iota = rng.random_range(0.5..2.0);
            let eta = rng.random_range(-1.0..1.0);
            let g: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            let a = km.energy(iota, &g, eta);
            let b = km.energy(iota, &rotate_rows(&q, &g, dim), eta);
            objectivity = objectivity.max((a - b).abs() / a.abs().max(1.0));

            let nu = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let gn: Vec<f64> = (0..2 * dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            let a = cm.energy(iota, &nu, &gn, eta);
            let b = cm.energy(iota, &nu, &rotate_rows(&q, &gn, dim), eta);
            objectivity = objectivity.max((a - b).abs() / a.abs().max(1.0));
        }
    }
    pass &= objectivity <= 1e-12;
    Ok((
        pass,
        format!("max relative partial error {worst:.1e}, objectivity defect {objectivity:.1e}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("operator order", operators, Duration::from_secs(5)),
        (
            "classical reduction",
            classical_reduction,
            Duration::from_secs(60),
        ),
        (
            "korteweg defect identity",
            korteweg_defect,
            Duration::from_secs(30),
        ),
        (
            "complex defect identity",
            complex_defect,
            Duration::from_secs(60),
        ),
        ("reduction chain", reduction_chain, Duration::from_secs(60)),
        (
            "cancellation scenario",
            cancellation,
            Duration::from_secs(60),
        ),
        ("generation scenario", generation, Duration::from_secs(60)),
        ("dual routes", dual_routes, Duration::from_secs(60)),
        ("transport", transport, Duration::from_secs(120)),
        ("model validation", validation, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (k, (name, f, budget)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let elapsed = t0.elapsed();
        let ok = ok && elapsed <= *budget;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<26} {}  [{:.2}s] {detail}",
            k + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
