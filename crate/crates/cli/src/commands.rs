//! Subcommand implementations. Every command resolves a [`Config`], writes
//! its outputs under `--out` and returns a short stdout summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crocco_core::crocco::{
    complex_crocco, complex_defect, korteweg_crocco, korteweg_defect, ComplexState, CroccoReport,
    KortewegState,
};
use crocco_core::manufactured::{self, Generation};
use crocco_core::models::{
    catalog, validate_partials, ComplexFluidModel, ConstitutiveLaw, DEFAULT_POINTS, DEFAULT_SEED,
};
use crocco_core::refine::{refinement_study, RefinementReport};
use crocco_core::smectic::{smectic_crocco, SmecticState};
use crocco_core::transport::{self, TransportConfig, TransportState, DIAGNOSTIC_COLUMNS};
use crocco_core::{Field, Grid, Order, Scalar, Shape, Vector, VectorField};
use thiserror::Error;

use crate::config::{Config, ConfigError, ModelConfig};
use crate::io::{fmt_f64, Encoding, FieldFile, FieldFileError};

pub const CSV_VERSION: &str = "crocco-csv v1";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    FieldFile(#[from] FieldFileError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] crocco_core::Error),
    #[error("{0}")]
    Failed(String),
}

impl RunError {
    /// 1 for usage, configuration and I/O problems; 2 for numerical errors
    /// and failed checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) | RunError::Config(_) | RunError::Io { .. } => 1,
            RunError::FieldFile(FieldFileError::Core(_)) => 2,
            RunError::FieldFile(_) => 1,
            RunError::Core(crocco_core::Error::UnknownGenerator(_)) => 1,
            RunError::Core(_) | RunError::Failed(_) => 2,
        }
    }
}

type Result<T> = std::result::Result<T, RunError>;

/// Options shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub grid: Option<usize>,
    pub refine: Option<usize>,
}

struct Run {
    config: Config,
    base: PathBuf,
    out: PathBuf,
    encoding: Encoding,
}

impl Run {
    fn new(opts: &Options) -> Result<Self> {
        let (mut config, base) = match &opts.config {
            Some(path) => (
                Config::load(path)?,
                path.parent().map(Path::to_path_buf).unwrap_or_default(),
            ),
            None => (Config::default(), PathBuf::new()),
        };
        if let Some(n) = opts.grid {
            config.grid.n = n;
        }
        let encoding = config.output.encoding()?;
        fs::create_dir_all(&opts.out).map_err(|source| RunError::Io {
            path: opts.out.display().to_string(),
            source,
        })?;
        Ok(Run {
            config,
            base,
            out: opts.out.clone(),
            encoding,
        })
    }

    fn read<S: Shape>(&self, path: &Path, shape: S) -> Result<Field<S>> {
        Ok(FieldFile::read(&self.base.join(path))?.into_field(shape)?)
    }

    fn input<S: Shape>(&self, path: &Option<PathBuf>, key: &str, shape: S) -> Result<Field<S>> {
        let p = path.as_ref().ok_or_else(|| {
            RunError::Usage(format!("state.{key} is required with field-file input"))
        })?;
        self.read(p, shape)
    }

    fn write_field<S: Shape>(&self, name: &str, f: &Field<S>) -> Result<()> {
        FieldFile::from_field(f).write(&self.out.join(format!("{name}.field")), self.encoding)?;
        Ok(())
    }

    fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let path = self.out.join(name);
        fs::write(&path, text).map_err(|source| RunError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Comment lines carrying the format version and the resolved config.
    fn csv_header(&self, command: &str) -> String {
        let mut s = format!("# {CSV_VERSION}\n# command {command}\n");
        for line in self.config.to_toml().lines() {
            s.push_str("# ");
            s.push_str(line);
            s.push('\n');
        }
        s
    }

    fn generator(&self, default: &str) -> String {
        self.config
            .state
            .generator
            .clone()
            .unwrap_or_else(|| default.to_string())
    }

    fn levels(&self, grid: &Grid, refine: Option<usize>) -> Result<Vec<Grid>> {
        let k = refine.unwrap_or(1);
        if k == 0 {
            return Err(RunError::Usage("--refine must be at least 1".into()));
        }
        Ok(grid.hierarchy(k))
    }
}

fn no_file_refinement(run: &Run, refine: Option<usize>) -> Result<()> {
    if run.config.state.has_files() && refine.unwrap_or(1) > 1 {
        return Err(RunError::Usage(
            "--refine needs a state generator, not field files".into(),
        ));
    }
    Ok(())
}

fn default_korteweg(generator: &str) -> ModelConfig {
    let (c, beta) = if generator == "cancellation" {
        let k = manufactured::Cancellation::default();
        (-k.beta, k.beta)
    } else {
        (2.0, 0.7)
    };
    ModelConfig::Korteweg {
        energy: "quadratic".into(),
        c,
        iota0: 1.0,
        iota1: None,
        iota2: None,
        beta,
        e0: 1.0,
        cv: 1.0,
        kappa0: None,
        kappa1: None,
    }
}

fn quadratic_gl(m: usize, k: f64, nu0: Vec<f64>, nu1: Vec<f64>, c: f64, a: f64) -> ModelConfig {
    ModelConfig::ComplexGl {
        energy: "quadratic".into(),
        c,
        iota0: 1.0,
        iota1: None,
        iota2: None,
        m,
        gamma: "quadratic".into(),
        k,
        nu0: Some(nu0),
        nu1: Some(nu1),
        gamma_c: 0.0,
        component: 0,
        w1: 0.0,
        w2: 0.0,
        a,
        e0: 1.0,
        cv: 1.0,
        sphere: false,
        omega: None,
        lambda: None,
    }
}

fn default_complex(generator: &str) -> ModelConfig {
    if generator == "generation" {
        let g = Generation::default();
        quadratic_gl(1, g.k, vec![0.0], vec![0.0], g.c, g.a)
    } else {
        quadratic_gl(2, 2.0, vec![0.1, -0.2], vec![0.3, 0.1], 1.5, 0.8)
    }
}

fn default_transport() -> ModelConfig {
    quadratic_gl(2, 0.0, vec![0.0; 2], vec![0.0; 2], 1.0, 1.0)
}

fn default_smectic() -> ModelConfig {
    ModelConfig::Smectic {
        gamma1: 1.0,
        gamma2: 0.5,
        eps_reg: 1e-8,
    }
}

const NORM_COLUMNS: &str = "level,cells,h,field,l2,linf";

fn norm_rows(
    csv: &mut String,
    level: usize,
    grid: &Grid,
    report: &CroccoReport,
    extra: &[(&str, &VectorField)],
) {
    let mut row = |name: &str, f: &VectorField| {
        let n = f.norms();
        let _ = writeln!(
            csv,
            "{level},{},{},{name},{},{}",
            grid.extents()[0],
            fmt_f64(grid.max_spacing()),
            fmt_f64(n.l2),
            fmt_f64(n.linf)
        );
    };
    row("lhs", &report.lhs);
    for (name, f) in &report.terms {
        row(name, f);
    }
    row("residual", &report.residual);
    for (name, f) in extra {
        row(name, f);
    }
}

fn write_report(run: &Run, report: &CroccoReport) -> Result<()> {
    run.write_field("lhs", &report.lhs)?;
    for (name, f) in &report.terms {
        run.write_field(name, f)?;
    }
    run.write_field("residual", &report.residual)
}

fn order_line(label: &str, report: &RefinementReport) -> String {
    format!(
        "{label}: finest error {:.3e}, observed order {}\n",
        report.finest_error(),
        report.observed_order
    )
}

fn summary(report: &CroccoReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} relation", report.relation.as_str());
    for (name, f) in &report.terms {
        let _ = writeln!(s, "  {name:<22} linf {:.6e}", f.norms().linf);
    }
    let _ = writeln!(
        s,
        "  {:<22} linf {:.6e}",
        "residual",
        report.residual.norms().linf
    );
    s
}

pub fn eval_korteweg(opts: &Options) -> Result<String> {
    let mut run = Run::new(opts)?;
    no_file_refinement(&run, opts.refine)?;
    let generator = run.generator("korteweg_trig");
    let model_cfg = run
        .config
        .model
        .get_or_insert_with(|| default_korteweg(&generator))
        .clone();
    let setup = model_cfg.korteweg()?;
    let (model, coenergy) = (setup.model, setup.coenergy);
    let states: Vec<KortewegState> = if run.config.state.has_files() {
        let s = &run.config.state;
        vec![KortewegState::new(
            run.input(&s.v, "v", Vector)?,
            run.input(&s.iota, "iota", Scalar)?,
            run.input(&s.eta, "eta", Scalar)?,
        )?]
    } else {
        run.config.state.generator = Some(generator.clone());
        let grid = run.config.grid.build()?;
        run.levels(&grid, opts.refine)?
            .iter()
            .map(|g| manufactured::korteweg_state(&generator, g))
            .collect::<crocco_core::Result<_>>()?
    };
    let mut csv = run.csv_header("eval-korteweg");
    csv.push_str(NORM_COLUMNS);
    csv.push('\n');
    let mut last = None;
    let mut defects = Vec::new();
    for (level, state) in states.iter().enumerate() {
        let report = korteweg_crocco(state, &model, coenergy.as_ref())?;
        let defect = korteweg_defect(state, &model, coenergy.as_ref())?;
        norm_rows(
            &mut csv,
            level,
            state.v().grid(),
            &report,
            &[("defect", &defect)],
        );
        defects.push((state.v().grid().max_spacing(), defect.norms().linf));
        last = Some(report);
    }
    finish_eval(&run, last, defects, csv)
}

fn finish_eval(
    run: &Run,
    last: Option<CroccoReport>,
    defects: Vec<(f64, f64)>,
    csv: String,
) -> Result<String> {
    let report = last.expect("at least one level");
    write_report(run, &report)?;
    run.write_text("norms.csv", &csv)?;
    let mut out = summary(&report);
    if defects.len() >= 3 {
        out.push_str(&order_line(
            "defect",
            &RefinementReport::from_levels(defects)?,
        ));
    }
    Ok(out)
}

pub fn eval_complex(opts: &Options) -> Result<String> {
    let mut run = Run::new(opts)?;
    no_file_refinement(&run, opts.refine)?;
    let generator = run.generator("complex_trig");
    let model_cfg = run
        .config
        .model
        .get_or_insert_with(|| default_complex(&generator))
        .clone();
    let setup = model_cfg.complex()?;
    let (model, coenergy) = (setup.model, setup.coenergy);
    let states: Vec<ComplexState> = if run.config.state.has_files() {
        let s = &run.config.state;
        vec![ComplexState::new(
            run.input(&s.v, "v", Vector)?,
            run.input(&s.iota, "iota", Scalar)?,
            run.input(&s.eta, "eta", Scalar)?,
            run.input(&s.nu, "nu", Order(model.m()))?,
        )?]
    } else {
        run.config.state.generator = Some(generator.clone());
        let grid = if generator == "generation" {
            Generation::default().grid(run.config.grid.n)?
        } else {
            run.config.grid.build()?
        };
        run.levels(&grid, opts.refine)?
            .iter()
            .map(|g| manufactured::complex_state(&generator, g, model.m()))
            .collect::<crocco_core::Result<_>>()?
    };
    let mut csv = run.csv_header("eval-complex");
    csv.push_str(NORM_COLUMNS);
    csv.push('\n');
    let mut last = None;
    let mut defects = Vec::new();
    for (level, state) in states.iter().enumerate() {
        let report = complex_crocco(state, &model, coenergy.as_ref())?;
        let defect = complex_defect(state, &model, coenergy.as_ref())?;
        norm_rows(
            &mut csv,
            level,
            state.v().grid(),
            &report,
            &[("defect", &defect)],
        );
        defects.push((state.v().grid().max_spacing(), defect.norms().linf));
        last = Some(report);
    }
    finish_eval(&run, last, defects, csv)
}

pub fn eval_smectic(opts: &Options) -> Result<String> {
    let mut run = Run::new(opts)?;
    no_file_refinement(&run, opts.refine)?;
    run.config
        .grid
        .boundary
        .get_or_insert_with(|| "one-sided".into());
    let generator = run.generator("smectic_wavy");
    let model = run
        .config
        .model
        .get_or_insert_with(default_smectic)
        .smectic()?;
    let states: Vec<SmecticState> = if run.config.state.has_files() {
        let s = &run.config.state;
        vec![SmecticState::new(
            run.input(&s.v, "v", Vector)?,
            run.input(&s.eta, "eta", Scalar)?,
            run.input(&s.w, "w", Scalar)?,
        )?]
    } else {
        run.config.state.generator = Some(generator.clone());
        let grid = run.config.grid.build()?;
        run.levels(&grid, opts.refine)?
            .iter()
            .map(|g| manufactured::smectic_state(&generator, g))
            .collect::<crocco_core::Result<_>>()?
    };
    let mut csv = run.csv_header("eval-smectic");
    csv.push_str(NORM_COLUMNS);
    csv.push('\n');
    let mut last = None;
    for (level, state) in states.iter().enumerate() {
        let report = smectic_crocco(state, &model)?;
        norm_rows(&mut csv, level, state.v().grid(), &report, &[]);
        last = Some(report);
    }
    finish_eval(&run, last, Vec::new(), csv)
}

pub fn transport2d(opts: &Options) -> Result<String> {
    if opts.refine.is_some() {
        return Err(RunError::Usage(
            "--refine does not apply to transport2d".into(),
        ));
    }
    let mut run = Run::new(opts)?;
    if run.config.grid.dim != 2 {
        return Err(RunError::Usage("transport2d needs grid.dim = 2".into()));
    }
    let model_cfg = run
        .config
        .model
        .get_or_insert_with(default_transport)
        .clone();
    let model: ComplexFluidModel = model_cfg.complex()?.model;
    let t = run.config.transport.clone();
    let mode = t.nu_mode()?;
    let (omega, nu) = if run.config.state.has_files() {
        let s = &run.config.state;
        let omega = run.input(&s.omega, "omega", Scalar)?;
        let nu = run.input(&s.nu, "nu", Order(model.m()))?;
        (omega, nu)
    } else {
        let grid = run.config.grid.build()?;
        (
            manufactured::omega_field(&t.omega, &grid)?,
            manufactured::nu_field(&t.nu, &grid)?,
        )
    };
    let initial = TransportState::new(omega, nu, 0.0)?;
    let dt = match t.dt {
        Some(dt) => dt,
        None => {
            let h = initial.omega.grid().max_spacing();
            let vmax = initial.velocity().max_abs();
            if vmax > 0.0 {
                t.cfl * h / vmax
            } else {
                t.cfl * h
            }
        }
    };
    let config = TransportConfig {
        mode,
        dt,
        steps: t.steps,
        model,
        diagnostics_every: t.every,
    };
    let result = transport::run(&config, initial)?;
    let mut csv = run.csv_header("transport2d");
    let _ = writeln!(csv, "# dt {}", fmt_f64(dt));
    let _ = writeln!(csv, "{}", DIAGNOSTIC_COLUMNS.join(","));
    for d in &result.series {
        let row: Vec<String> = d.row().iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(csv, "{}", row.join(","));
    }
    run.write_text("timeseries.csv", &csv)?;
    let fin = &result.final_state;
    run.write_field("omega", &fin.omega)?;
    run.write_field("psi", &fin.psi)?;
    run.write_field("nu", &fin.nu)?;
    let first = result.series.first().expect("initial diagnostics");
    let end = result.series.last().expect("final diagnostics");
    Ok(format!(
        "transport2d {} steps, dt {dt:.4e}, t = {:.4e}\n  l2_omega {:.6e} -> {:.6e}\n  enstrophy {:.6e} -> {:.6e}\n  omega zero crossings {} -> {}\n",
        config.steps,
        end.t,
        first.l2_omega,
        end.l2_omega,
        first.enstrophy,
        end.enstrophy,
        first.zero_crossings,
        end.zero_crossings
    ))
}

pub fn mms_verify(opts: &Options) -> Result<String> {
    let mut run = Run::new(opts)?;
    if run.config.state.has_files() {
        return Err(RunError::Usage(
            "mms-verify uses the manufactured suites only".into(),
        ));
    }
    let count = opts.refine.unwrap_or(3);
    if count < 3 {
        return Err(RunError::Usage(
            "mms-verify needs --refine of at least 3".into(),
        ));
    }
    let mms = run.config.mms.clone();
    let (korteweg, complex) = match mms.suite.as_str() {
        "korteweg" => (true, false),
        "complex" => (false, true),
        "all" => (true, true),
        other => {
            return Err(ConfigError::Value(format!("mms.suite {other:?}")).into());
        }
    };
    run.config
        .grid
        .boundary
        .get_or_insert_with(|| "periodic".into());
    let grids = run.config.grid.build()?.hierarchy(count);
    let mut studies: Vec<(String, RefinementReport)> = Vec::new();
    if korteweg {
        for case in manufactured::korteweg_suite()? {
            let report = refinement_study(&grids, |g| {
                let s = case.state(g)?;
                Ok(korteweg_defect(&s, &case.model, case.coenergy.as_ref())?
                    .norms()
                    .linf)
            })?;
            studies.push((case.name.to_string(), report));
        }
    }
    if complex {
        for case in manufactured::complex_suite()? {
            let report = refinement_study(&grids, |g| {
                let s = case.state(g)?;
                Ok(complex_defect(&s, &case.model, case.coenergy.as_ref())?
                    .norms()
                    .linf)
            })?;
            studies.push((case.name.to_string(), report));
        }
    }
    let mut csv = run.csv_header("mms-verify");
    csv.push_str("case,level,h,defect_linf,observed_order\n");
    let mut out = String::new();
    let mut failed = Vec::new();
    for (name, report) in &studies {
        let order = match report.observed_order {
            crocco_core::ObservedOrder::Exact => "exact".to_string(),
            crocco_core::ObservedOrder::Slope(s) => fmt_f64(s),
        };
        for (level, (h, e)) in report.levels.iter().enumerate() {
            let _ = writeln!(
                csv,
                "{name},{level},{},{},{order}",
                fmt_f64(*h),
                fmt_f64(*e)
            );
        }
        let ok = report.observed_order.at_least(mms.min_order);
        if !ok {
            failed.push(name.clone());
        }
        out.push_str(&order_line(
            &format!("{} {name}", if ok { "PASS" } else { "FAIL" }),
            report,
        ));
    }
    run.write_text("mms.csv", &csv)?;
    if failed.is_empty() {
        Ok(out)
    } else {
        print!("{out}");
        Err(RunError::Failed(format!(
            "observed order below {} for {}",
            mms.min_order,
            failed.join(", ")
        )))
    }
}

pub fn validate_models(opts: &Options) -> Result<String> {
    if opts.refine.is_some() || opts.grid.is_some() {
        return Err(RunError::Usage(
            "--grid and --refine do not apply to validate-models".into(),
        ));
    }
    let run = Run::new(opts)?;
    let mut laws: Vec<Box<dyn ConstitutiveLaw>> = catalog();
    if let Some(m) = &run.config.model {
        match m {
            ModelConfig::Korteweg { .. } => {
                let s = m.korteweg()?;
                laws.push(Box::new(s.model));
                if let Some(c) = s.coenergy {
                    laws.push(Box::new(c));
                }
            }
            ModelConfig::ComplexGl { .. } => {
                let s = m.complex()?;
                laws.push(Box::new(s.model));
                if let Some(c) = s.coenergy {
                    laws.push(Box::new(c) as Box<dyn ConstitutiveLaw>);
                }
            }
            ModelConfig::Smectic { .. } => {}
        }
    }
    let mut csv = run.csv_header("validate-models");
    csv.push_str("model,points,max_rel_error,passed,failing_arguments\n");
    let mut out = String::new();
    let mut failed = Vec::new();
    for law in &laws {
        let r = validate_partials(law.as_ref(), DEFAULT_POINTS, DEFAULT_SEED);
        let args = r.failing_arguments().join(" ");
        let _ = writeln!(
            csv,
            "{},{},{},{},{args}",
            r.model,
            r.points,
            fmt_f64(r.max_rel_error),
            r.passed()
        );
        let _ = writeln!(
            out,
            "{} {:<40} max rel error {:.3e}",
            if r.passed() { "PASS" } else { "FAIL" },
            r.model,
            r.max_rel_error
        );
        if !r.passed() {
            failed.push(r.model.clone());
        }
    }
    run.write_text("validation.csv", &csv)?;
    if failed.is_empty() {
        Ok(out)
    } else {
        print!("{out}");
        Err(RunError::Failed(format!(
            "partials disagree for {}",
            failed.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::Usage("x".into()).exit_code(), 1);
        assert_eq!(
            RunError::Config(ConfigError::Value("x".into())).exit_code(),
            1
        );
        assert_eq!(RunError::Failed("x".into()).exit_code(), 2);
        assert_eq!(
            RunError::Core(crocco_core::Error::UnknownGenerator("x".into())).exit_code(),
            1
        );
    }

    #[test]
    fn default_models_build() {
        for g in ["korteweg_trig", "cancellation"] {
            default_korteweg(g).korteweg().unwrap();
        }
        for g in ["complex_trig", "generation"] {
            default_complex(g).complex().unwrap();
        }
        default_transport().complex().unwrap();
        default_smectic().smectic().unwrap();
    }
}
