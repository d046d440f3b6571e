//! Finite-difference self-check of analytic partials in argument space.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::complex::Gamma;
use super::complex::{ComplexFluidModel, OrderCoEnergy};
use super::korteweg::{EntropicPart, KortewegCoEnergy, KortewegModel, MechanicalEnergy};

pub const DEFAULT_POINTS: usize = 100;
pub const DEFAULT_SEED: u64 = 0x5eed_c0cc;
/// Relative error bound, with denominator `max(|analytic|, 1)`.
pub const FD_TOLERANCE: f64 = 1e-6;

/// A pointwise constitutive function of a flat argument vector.
pub trait ConstitutiveLaw {
    fn name(&self) -> String;
    fn arguments(&self) -> Vec<String>;
    fn energy(&self, x: &[f64]) -> f64;
    /// Analytic partials, one per argument.
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// A random admissible point.
    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationFailure {
    pub argument: String,
    pub point: Vec<f64>,
    pub analytic: f64,
    pub finite_difference: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub model: String,
    pub points: usize,
    pub max_rel_error: f64,
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Distinct argument names that failed at least once.
    pub fn failing_arguments(&self) -> Vec<String> {
        let mut names: Vec<String> = self.failures.iter().map(|f| f.argument.clone()).collect();
        names.sort();
        names.dedup();
        names
    }
}

/// Compares analytic partials with central differences at `points` seeded
/// random points.
pub fn validate_partials<L: ConstitutiveLaw + ?Sized>(
    law: &L,
    points: usize,
    seed: u64,
) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = law.arguments();
    let mut failures = Vec::new();
    let mut max_rel_error: f64 = 0.0;
    for _ in 0..points {
        let x = law.sample_point(&mut rng);
        let analytic = law.gradient(&x);
        for (i, name) in names.iter().enumerate() {
            let h = 1e-5 * x[i].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (law.energy(&xp) - law.energy(&xm)) / (xp[i] - xm[i]);
            let rel = (fd - analytic[i]).abs() / analytic[i].abs().max(1.0);
            max_rel_error = max_rel_error.max(rel);
            if !(rel < FD_TOLERANCE) {
                failures.push(ValidationFailure {
                    argument: name.clone(),
                    point: x.clone(),
                    analytic: analytic[i],
                    finite_difference: fd,
                    rel_error: rel,
                });
            }
        }
    }
    ValidationReport {
        model: law.name(),
        points,
        max_rel_error,
        failures,
    }
}

/// Wraps a law and scales one analytic partial; used for fault injection.
pub struct ScaledPartial<'a, L: ?Sized> {
    pub inner: &'a L,
    pub argument: usize,
    pub factor: f64,
}

impl<L: ConstitutiveLaw + ?Sized> ConstitutiveLaw for ScaledPartial<'_, L> {
    fn name(&self) -> String {
        format!("{} (scaled partial {})", self.inner.name(), self.argument)
    }
    fn arguments(&self) -> Vec<String> {
        self.inner.arguments()
    }
    fn energy(&self, x: &[f64]) -> f64 {
        self.inner.energy(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.inner.gradient(x);
        g[self.argument] *= self.factor;
        g
    }
    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.inner.sample_point(rng)
    }
}

const SPATIAL: usize = 3;

fn grad_names(prefix: &str, m: Option<usize>) -> Vec<String> {
    match m {
        None => (0..SPATIAL).map(|i| format!("{prefix}_{i}")).collect(),
        Some(m) => (0..m)
            .flat_map(|a| (0..SPATIAL).map(move |i| format!("{prefix}[{a}]_{i}")))
            .collect(),
    }
}

// Korteweg φ(ι, g, η) with g ∈ R³.
impl ConstitutiveLaw for KortewegModel {
    fn name(&self) -> String {
        "korteweg".into()
    }
    fn arguments(&self) -> Vec<String> {
        let mut a = vec!["iota".to_string()];
        a.extend(grad_names("grad_iota", None));
        a.push("eta".into());
        a
    }
    fn energy(&self, x: &[f64]) -> f64 {
        KortewegModel::energy(self, x[0], &x[1..4], x[4])
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        vec![
            self.d_iota(x[0]),
            self.beta * x[1],
            self.beta * x[2],
            self.beta * x[3],
            self.temperature(x[4]),
        ]
    }
    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        vec![
            rng.random_range(0.5..2.5),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ]
    }
}

// χ(ι, ι̇).
impl ConstitutiveLaw for KortewegCoEnergy {
    fn name(&self) -> String {
        "korteweg-coenergy".into()
    }
    fn arguments(&self) -> Vec<String> {
        vec!["iota".into(), "iota_dot".into()]
    }
    fn energy(&self, x: &[f64]) -> f64 {
        self.value(x[0], x[1])
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        vec![self.d_iota(x[1]), self.d_iota_dot(x[0], x[1])]
    }
    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        vec![rng.random_range(0.5..2.0), rng.random_range(-2.0..2.0)]
    }
}

// φ(ι, ν, grad ν, η) with grad ν ∈ R^{m×3}.
impl ConstitutiveLaw for ComplexFluidModel {
    fn name(&self) -> String {
        "ginzburg-landau".into()
    }
    fn arguments(&self) -> Vec<String> {
        let m = self.m();
        let mut a = vec!["iota".to_string()];
        a.extend((0..m).map(|i| format!("nu[{i}]")));
        a.extend(grad_names("grad_nu", Some(m)));
        a.push("eta".into());
        a
    }
    fn energy(&self, x: &[f64]) -> f64 {
        let m = self.m();
        let g = 1 + m;
        ComplexFluidModel::energy(self, x[0], &x[1..g], &x[g..g + 3 * m], x[g + 3 * m])
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let m = self.m();
        let g = 1 + m;
        let mut out = vec![0.0; x.len()];
        out[0] = self.d_iota(x[0], &x[1..g]);
        self.d_nu(x[0], &x[1..g], &mut out[1..g]);
        for k in 0..3 * m {
            out[g + k] = self.a * x[g + k];
        }
        out[g + 3 * m] = self.temperature(x[g + 3 * m]);
        out
    }
    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let m = self.m();
        let mut x = vec![rng.random_range(0.5..2.0)];
        let nu: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        if self.sphere_constrained {
            let n = nu.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3);
            x.extend(nu.iter().map(|v| v / n));
        } else {
            x.extend(nu);
        }
        x.extend((0..3 * m).map(|_| rng.random_range(-1.0..1.0)));
        x.push(rng.random_range(-1.0..1.0));
        x
    }
}

// χ(ν, ν̇).
impl ConstitutiveLaw for OrderCoEnergy {
    fn name(&self) -> String {
        "order-coenergy".into()
    }
    fn arguments(&self) -> Vec<String> {
        let m = self.m();
        (0..m)
            .map(|i| format!("nu[{i}]"))
            .chain((0..m).map(|i| format!("nu_dot[{i}]")))
            .collect()
    }
    fn energy(&self, x: &[f64]) -> f64 {
        self.value(&x[self.m()..])
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let m = self.m();
        let mut out = vec![0.0; 2 * m];
        self.d_nu_dot(&x[m..], &mut out[m..]);
        out
    }
    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..2 * self.m())
            .map(|_| rng.random_range(-2.0..2.0))
            .collect()
    }
}

/// Every catalog law with representative parameters.
pub fn catalog() -> Vec<Box<dyn ConstitutiveLaw>> {
    vec![
        Box::new(
            KortewegModel::new(
                MechanicalEnergy::TwoWell {
                    c: 1.0,
                    iota1: 1.0,
                    iota2: 2.0,
                },
                EntropicPart::default(),
                0.5,
            )
            .expect("catalog parameters are valid"),
        ),
        Box::new(
            KortewegModel::new(
                MechanicalEnergy::Quadratic {
                    c: -0.8,
                    iota0: 1.1,
                },
                EntropicPart::new(2.0, 0.7).expect("catalog parameters are valid"),
                0.0,
            )
            .expect("catalog parameters are valid"),
        ),
        Box::new(KortewegCoEnergy::new(1.0, 0.5).expect("catalog parameters are valid")),
        Box::new(
            ComplexFluidModel::new(
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
            )
            .expect("catalog parameters are valid"),
        ),
        Box::new(
            ComplexFluidModel::new(
                3,
                Gamma::TwoWell {
                    c: 0.5,
                    component: 1,
                    w1: -0.5,
                    w2: 0.5,
                },
                MechanicalEnergy::TwoWell {
                    c: 1.0,
                    iota1: 0.8,
                    iota2: 1.4,
                },
                EntropicPart::default(),
                1.0,
                true,
            )
            .expect("catalog parameters are valid"),
        ),
        Box::new(
            OrderCoEnergy::new(vec![2.0, 0.5, 0.5, 1.0], vec![1.0, -0.5])
                .expect("catalog parameters are valid"),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn korteweg(beta: f64) -> KortewegModel {
        KortewegModel::new(
            MechanicalEnergy::TwoWell {
                c: 1.0,
                iota1: 1.0,
                iota2: 2.0,
            },
            EntropicPart::default(),
            beta,
        )
        .unwrap()
    }

    #[test]
    fn catalog_passes() {
        for law in catalog() {
            let r = validate_partials(law.as_ref(), DEFAULT_POINTS, DEFAULT_SEED);
            assert!(r.passed(), "{}: {:?}", r.model, r.failures.first());
        }
    }

    #[test]
    fn corrupted_iota_partial_is_caught() {
        let m = korteweg(0.5);
        let bad = ScaledPartial {
            inner: &m,
            argument: 0,
            factor: 1.1,
        };
        let r = validate_partials(&bad, DEFAULT_POINTS, DEFAULT_SEED);
        assert!(!r.passed());
        assert_eq!(r.failing_arguments(), vec!["iota".to_string()]);
    }

    #[test]
    fn zero_beta_has_zero_gradient_partials() {
        let m = korteweg(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x = m.sample_point(&mut rng);
            assert_eq!(&m.gradient(&x)[1..4], &[0.0, 0.0, 0.0]);
        }
        assert!(validate_partials(&m, DEFAULT_POINTS, DEFAULT_SEED).passed());
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let m = korteweg(0.3);
        let a = validate_partials(&m, 10, 7);
        let b = validate_partials(&m, 10, 7);
        assert_eq!(a, b);
    }
}
