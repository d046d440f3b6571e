//! TOML run configuration. Unknown keys are rejected everywhere.
//!
//! ```toml
//! [grid]
//! n = 64
//! boundary = "periodic"
//!
//! [model]
//! name = "korteweg"
//! beta = 0.7
//! kappa0 = 1.0
//! kappa1 = 0.5
//!
//! [state]
//! generator = "korteweg_trig"
//!
//! [output]
//! encoding = "binary"
//! ```

use std::path::{Path, PathBuf};

use crocco_core::models::{
    ComplexFluidModel, EntropicPart, Gamma, KortewegCoEnergy, KortewegModel, MechanicalEnergy,
    OrderCoEnergy,
};
use crocco_core::smectic::SmecticModel;
use crocco_core::transport::NuMode;
use crocco_core::{Boundary, Grid};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::Encoding;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Value(String),
}

type Result<T> = std::result::Result<T, ConfigError>;

fn value_err(msg: impl Into<String>) -> ConfigError {
    ConfigError::Value(msg.into())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub grid: GridConfig,
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub state: StateConfig,
    #[serde(default)]
    pub transport: TransportOptions,
    #[serde(default)]
    pub mms: MmsOptions,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Cells per axis.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// "periodic" or "one-sided"; the command picks when absent.
    pub boundary: Option<String>,
    /// Domain length per axis; 2π for periodic grids, 1 otherwise.
    pub length: Option<f64>,
}

fn default_n() -> usize {
    32
}

fn default_dim() -> usize {
    2
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: default_n(),
            dim: default_dim(),
            boundary: None,
            length: None,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        let name = self.boundary.as_deref().unwrap_or("periodic");
        let b =
            Boundary::parse(name).ok_or_else(|| value_err(format!("grid.boundary {name:?}")))?;
        let length = self.length.unwrap_or(match b {
            Boundary::Periodic => std::f64::consts::TAU,
            Boundary::OneSided => 1.0,
        });
        let h = match b {
            Boundary::Periodic => length / self.n as f64,
            Boundary::OneSided => length / (self.n.max(2) - 1) as f64,
        };
        Grid::new(
            &vec![self.n; self.dim],
            &vec![h; self.dim],
            &vec![b; self.dim],
        )
        .map_err(|e| value_err(e.to_string()))
    }
}

fn one() -> f64 {
    1.0
}

/// Catalog model, selected by `name`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Korteweg {
        #[serde(default = "quadratic")]
        energy: String,
        c: f64,
        #[serde(default = "one")]
        iota0: f64,
        iota1: Option<f64>,
        iota2: Option<f64>,
        beta: f64,
        #[serde(default = "one")]
        e0: f64,
        #[serde(default = "one")]
        cv: f64,
        kappa0: Option<f64>,
        kappa1: Option<f64>,
    },
    ComplexGl {
        #[serde(default = "quadratic")]
        energy: String,
        c: f64,
        #[serde(default = "one")]
        iota0: f64,
        iota1: Option<f64>,
        iota2: Option<f64>,
        m: usize,
        /// "quadratic" (k, nu0, nu1) or "two_well" (gamma_c, component, w1, w2).
        #[serde(default = "quadratic")]
        gamma: String,
        #[serde(default)]
        k: f64,
        nu0: Option<Vec<f64>>,
        nu1: Option<Vec<f64>>,
        #[serde(default)]
        gamma_c: f64,
        #[serde(default)]
        component: usize,
        #[serde(default)]
        w1: f64,
        #[serde(default)]
        w2: f64,
        a: f64,
        #[serde(default = "one")]
        e0: f64,
        #[serde(default = "one")]
        cv: f64,
        #[serde(default)]
        sphere: bool,
        /// Row-major m×m kinetic matrix Ω; enables the co-energy with `lambda`.
        omega: Option<Vec<f64>>,
        lambda: Option<Vec<f64>>,
    },
    Smectic {
        gamma1: f64,
        gamma2: f64,
        #[serde(default = "default_eps")]
        eps_reg: f64,
    },
}

fn quadratic() -> String {
    "quadratic".into()
}

fn default_eps() -> f64 {
    1e-8
}

/// Mechanical energy f(ι): "quadratic" uses c, iota0; "two_well" uses c,
/// iota1, iota2.
fn mech(
    energy: &str,
    c: f64,
    iota0: f64,
    iota1: Option<f64>,
    iota2: Option<f64>,
) -> Result<MechanicalEnergy> {
    match energy {
        "quadratic" => Ok(MechanicalEnergy::Quadratic { c, iota0 }),
        "two_well" => Ok(MechanicalEnergy::TwoWell {
            c,
            iota1: iota1.ok_or_else(|| value_err("two_well energy needs iota1"))?,
            iota2: iota2.ok_or_else(|| value_err("two_well energy needs iota2"))?,
        }),
        other => Err(value_err(format!("model.energy {other:?}"))),
    }
}

fn core_err(e: crocco_core::Error) -> ConfigError {
    value_err(e.to_string())
}

pub struct KortewegSetup {
    pub model: KortewegModel,
    pub coenergy: Option<KortewegCoEnergy>,
}

pub struct ComplexSetup {
    pub model: ComplexFluidModel,
    pub coenergy: Option<OrderCoEnergy>,
}

impl ModelConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::Korteweg { .. } => "korteweg",
            ModelConfig::ComplexGl { .. } => "complex_gl",
            ModelConfig::Smectic { .. } => "smectic",
        }
    }

    fn wrong(&self, wanted: &str) -> ConfigError {
        value_err(format!(
            "this command needs a {wanted} model, got {}",
            self.name()
        ))
    }

    pub fn korteweg(&self) -> Result<KortewegSetup> {
        let ModelConfig::Korteweg {
            energy,
            c,
            iota0,
            iota1,
            iota2,
            beta,
            e0,
            cv,
            kappa0,
            kappa1,
        } = self
        else {
            return Err(self.wrong("korteweg"));
        };
        let entropic = EntropicPart::new(*e0, *cv).map_err(core_err)?;
        let model = KortewegModel::new(mech(energy, *c, *iota0, *iota1, *iota2)?, entropic, *beta)
            .map_err(core_err)?;
        let coenergy = match (kappa0, kappa1) {
            (None, None) => None,
            (Some(k0), k1) => {
                Some(KortewegCoEnergy::new(*k0, k1.unwrap_or(0.0)).map_err(core_err)?)
            }
            (None, Some(_)) => return Err(value_err("kappa1 given without kappa0")),
        };
        Ok(KortewegSetup { model, coenergy })
    }

    pub fn complex(&self) -> Result<ComplexSetup> {
        let ModelConfig::ComplexGl {
            energy,
            c,
            iota0,
            iota1,
            iota2,
            m,
            gamma,
            k,
            nu0,
            nu1,
            gamma_c,
            component,
            w1,
            w2,
            a,
            e0,
            cv,
            sphere,
            omega,
            lambda,
        } = self
        else {
            return Err(self.wrong("complex_gl"));
        };
        let g = match gamma.as_str() {
            "quadratic" => Gamma::Quadratic {
                k: *k,
                nu0: nu0.clone().unwrap_or_else(|| vec![0.0; *m]),
                nu1: nu1.clone().unwrap_or_else(|| vec![0.0; *m]),
            },
            "two_well" => Gamma::TwoWell {
                c: *gamma_c,
                component: *component,
                w1: *w1,
                w2: *w2,
            },
            other => return Err(value_err(format!("model.gamma {other:?}"))),
        };
        let entropic = EntropicPart::new(*e0, *cv).map_err(core_err)?;
        let model = ComplexFluidModel::new(
            *m,
            g,
            mech(energy, *c, *iota0, *iota1, *iota2)?,
            entropic,
            *a,
            *sphere,
        )
        .map_err(core_err)?;
        let coenergy = match (omega, lambda) {
            (None, None) => None,
            (Some(o), l) => Some(
                OrderCoEnergy::new(o.clone(), l.clone().unwrap_or_else(|| vec![0.0; *m]))
                    .map_err(core_err)?,
            ),
            (None, Some(_)) => return Err(value_err("lambda given without omega")),
        };
        Ok(ComplexSetup { model, coenergy })
    }

    pub fn smectic(&self) -> Result<SmecticModel> {
        let ModelConfig::Smectic {
            gamma1,
            gamma2,
            eps_reg,
        } = self
        else {
            return Err(self.wrong("smectic"));
        };
        SmecticModel::new(*gamma1, *gamma2, *eps_reg).map_err(core_err)
    }
}

/// Either a named manufactured generator or field files (paths relative to
/// the config file).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub generator: Option<String>,
    pub v: Option<PathBuf>,
    pub iota: Option<PathBuf>,
    pub eta: Option<PathBuf>,
    pub nu: Option<PathBuf>,
    pub w: Option<PathBuf>,
    /// Vorticity, for transport2d.
    pub omega: Option<PathBuf>,
}

impl StateConfig {
    pub fn has_files(&self) -> bool {
        self.v.is_some()
            || self.iota.is_some()
            || self.eta.is_some()
            || self.nu.is_some()
            || self.w.is_some()
            || self.omega.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportOptions {
    /// "frozen" or "advected".
    #[serde(default = "frozen")]
    pub mode: String,
    /// Time step; derived from `cfl` when absent.
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_every")]
    pub every: usize,
    #[serde(default = "default_omega")]
    pub omega: String,
    #[serde(default = "default_nu")]
    pub nu: String,
}

fn frozen() -> String {
    "frozen".into()
}

fn default_cfl() -> f64 {
    0.1
}

fn default_steps() -> usize {
    20
}

fn default_every() -> usize {
    10
}

fn default_omega() -> String {
    "mixed".into()
}

fn default_nu() -> String {
    "generic".into()
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            mode: frozen(),
            dt: None,
            cfl: default_cfl(),
            steps: default_steps(),
            every: default_every(),
            omega: default_omega(),
            nu: default_nu(),
        }
    }
}

impl TransportOptions {
    pub fn nu_mode(&self) -> Result<NuMode> {
        NuMode::parse(&self.mode)
            .ok_or_else(|| value_err(format!("transport.mode {:?}", self.mode)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MmsOptions {
    /// "korteweg", "complex" or "all".
    #[serde(default = "all")]
    pub suite: String,
    /// Minimum accepted observed order.
    #[serde(default = "default_min_order")]
    pub min_order: f64,
}

fn all() -> String {
    "all".into()
}

fn default_min_order() -> f64 {
    1.8
}

impl Default for MmsOptions {
    fn default() -> Self {
        MmsOptions {
            suite: all(),
            min_order: default_min_order(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Field-file payload: "binary" or "csv".
    #[serde(default = "binary")]
    pub encoding: String,
}

fn binary() -> String {
    "binary".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { encoding: binary() }
    }
}

impl OutputConfig {
    pub fn encoding(&self) -> Result<Encoding> {
        Encoding::parse(&self.encoding)
            .ok_or_else(|| value_err(format!("output.encoding {:?}", self.encoding)))
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// The resolved configuration, as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
