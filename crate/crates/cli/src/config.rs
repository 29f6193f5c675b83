//! Experiment configuration: the JSON schema and its resolved form.
//!
//! | key                            | default                                  |
//! |--------------------------------|------------------------------------------|
//! | `vqa.thermal_depth`            | `vqa.depth`, else 3 (spin), 2 (molecular)|
//! | `vqa.dynamics_depth`           | `vqa.depth`, else 3                      |
//! | `vqa.step`                     | 0.01 (imaginary-time step)               |
//! | `vqa.regularization`           | 1e-6 (spin), 1e-5 (molecular real time)  |
//! | `vqa.thermal_regularization`   | 1e-4                                     |
//! | `vqa.integrator`               | `rk4`                                    |
//! | `vqa.solver`                   | `cholesky`                               |
//! | `vqa.substeps`                 | 1 (spin), 2 (molecular)                  |
//! | `vqa.estimator`                | `direct`                                 |
//! | `vqa.shots`                    | none (exact expectation values)          |
//! | `vqa.seed`                     | 0                                        |
//! | `run.beta`                     | 0.5 (spin); from `temperature_k` else    |
//! | `run.temperature_k`            | 300 (molecular)                          |
//! | `run.t_max`                    | 5 (spin), 100 fs (molecular)             |
//! | `run.dt`                       | 0.01 (spin), 0.1 fs (molecular)          |
//! | `run.tau`                      | 20 (fs for molecular runs)               |
//! | `run.betas`                    | [0, 0.25, 0.5, 1.0]                      |
//! | `run.axis`                     | `x`                                      |
//! | `run.site`                     | 0                                        |
//! | `output.directory`             | `out`                                    |
//! | `output.formats`               | [`csv`]                                  |

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tfdvqa::estimators::ShotConfig;
use tfdvqa::models::{self, Axis, MonomerData};
use tfdvqa::vqa::{Integrator, LinearSolver, DEFAULT_REGULARIZATION, DEFAULT_STEP};

pub const DEFAULT_DEPTH: usize = 3;
pub const DEFAULT_THERMAL_REGULARIZATION: f64 = 1e-4;
pub const DEFAULT_SPIN_BETA: f64 = 0.5;
pub const DEFAULT_TEMPERATURE_K: f64 = 300.0;
pub const DEFAULT_SPIN_T_MAX: f64 = 5.0;
pub const DEFAULT_SPIN_DT: f64 = 0.01;
pub const DEFAULT_MOLECULAR_T_MAX: f64 = 100.0;
pub const DEFAULT_MOLECULAR_DT: f64 = 0.1;
pub const DEFAULT_MOLECULAR_SUBSTEPS: usize = 2;
pub const DEFAULT_MOLECULAR_THERMAL_DEPTH: usize = 2;
pub const DEFAULT_MOLECULAR_REGULARIZATION: f64 = 1e-5;
pub const DEFAULT_TAU: f64 = 20.0;
pub const DEFAULT_BETAS: [f64; 4] = [0.0, 0.25, 0.5, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Quench,
    Spectrum,
    ThermalFidelity,
    OracleCompare,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSection {
    Tfi { n_sites: usize, h_i: f64, h_f: Option<f64> },
    Exciton { monomer_file: PathBuf },
    Synthetic { seed: u64, count: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VqaSection {
    pub depth: Option<usize>,
    pub thermal_depth: Option<usize>,
    pub dynamics_depth: Option<usize>,
    pub step: Option<f64>,
    pub regularization: Option<f64>,
    pub thermal_regularization: Option<f64>,
    pub integrator: Option<Integrator>,
    pub solver: Option<LinearSolver>,
    pub substeps: Option<usize>,
    pub estimator: Option<tfdvqa::dynamics::Estimator>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub beta: Option<f64>,
    pub temperature_k: Option<f64>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub tau: Option<f64>,
    pub betas: Option<Vec<f64>>,
    pub axis: Option<Axis>,
    pub site: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub model: ModelSection,
    #[serde(default)]
    pub vqa: VqaSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// A schema violation, naming the offending key path.
#[derive(Debug)]
pub struct SchemaError {
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid config at `{}`: {}", self.key, self.message)
    }
}

fn schema(key: impl Into<String>, message: impl Into<String>) -> SchemaError {
    SchemaError { key: key.into(), message: message.into() }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, root: &str) -> Result<T, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let key = match (root.is_empty(), path == ".") {
            (true, _) => path,
            (false, true) => root.to_string(),
            (false, false) => format!("{root}{}", if path.starts_with('[') { path } else { format!(".{path}") }),
        };
        schema(key, e.into_inner().to_string())
    })
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, SchemaError> {
    parse_json(text, "")
}

/// Monomer file contents, with errors pointing into the file.
pub fn load_monomers(path: &Path) -> Result<Vec<MonomerData>, SchemaError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| schema("model.monomer_file", format!("cannot read {}: {e}", path.display())))?;
    let monomers: Vec<MonomerData> = parse_json(&text, "model.monomer_file")?;
    if monomers.is_empty() {
        return Err(schema("model.monomer_file", "monomer list is empty"));
    }
    for (i, m) in monomers.iter().enumerate() {
        m.validate().map_err(|e| schema(format!("model.monomer_file[{i}]"), e.to_string()))?;
    }
    Ok(monomers)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ResolvedModel {
    Tfi { n_sites: usize, h_i: f64, h_f: f64 },
    Exciton { monomer_file: Option<PathBuf>, synthetic_seed: Option<u64>, monomers: Vec<MonomerData> },
}

impl ResolvedModel {
    pub fn is_molecular(&self) -> bool {
        matches!(self, ResolvedModel::Exciton { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedVqa {
    pub thermal_depth: usize,
    pub dynamics_depth: usize,
    pub step: f64,
    pub regularization: f64,
    pub thermal_regularization: f64,
    pub integrator: Integrator,
    pub solver: LinearSolver,
    pub substeps: usize,
    pub estimator: tfdvqa::dynamics::Estimator,
    pub shots: Option<u64>,
    pub seed: u64,
}

impl ResolvedVqa {
    pub fn shot_config(&self) -> ShotConfig {
        ShotConfig { shots: self.shots, seed: self.seed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedRun {
    pub beta: f64,
    pub temperature_k: Option<f64>,
    pub t_max: f64,
    pub dt: f64,
    pub tau: f64,
    pub betas: Vec<f64>,
    pub axis: Axis,
    pub site: usize,
    /// ħ used to convert the flow time unit (eV·fs for molecular runs, 1 otherwise).
    pub hbar: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedOutput {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub command: Command,
    pub model: ResolvedModel,
    pub vqa: ResolvedVqa,
    pub run: ResolvedRun,
    pub output: ResolvedOutput,
}

fn positive(key: &str, v: f64) -> Result<f64, SchemaError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(schema(key, format!("must be finite and > 0, got {v}")))
    }
}

fn at_least_one(key: &str, v: usize) -> Result<usize, SchemaError> {
    if v >= 1 {
        Ok(v)
    } else {
        Err(schema(key, "must be >= 1"))
    }
}

/// Fills every default and checks ranges. `base` resolves relative monomer paths.
pub fn resolve(cfg: &ExperimentConfig, base: &Path, output_override: Option<&Path>) -> Result<ResolvedConfig, SchemaError> {
    let model = match &cfg.model {
        ModelSection::Tfi { n_sites, h_i, h_f } => {
            at_least_one("model.n_sites", *n_sites)?;
            if *n_sites > 6 {
                return Err(schema("model.n_sites", format!("at most 6 sites fit the dense oracle, got {n_sites}")));
            }
            if !h_i.is_finite() {
                return Err(schema("model.h_i", "must be finite"));
            }
            let h_f = h_f.unwrap_or(*h_i);
            if !h_f.is_finite() {
                return Err(schema("model.h_f", "must be finite"));
            }
            ResolvedModel::Tfi { n_sites: *n_sites, h_i: *h_i, h_f }
        }
        ModelSection::Exciton { monomer_file } => {
            let path = if monomer_file.is_absolute() { monomer_file.clone() } else { base.join(monomer_file) };
            let monomers = load_monomers(&path)?;
            if monomers.len() > 6 {
                return Err(schema("model.monomer_file", "at most 6 monomers fit the dense oracle"));
            }
            ResolvedModel::Exciton { monomer_file: Some(path), synthetic_seed: None, monomers }
        }
        ModelSection::Synthetic { seed, count } => {
            at_least_one("model.count", *count)?;
            if *count > 6 {
                return Err(schema("model.count", "at most 6 monomers fit the dense oracle"));
            }
            let monomers = models::synth_monomers(*seed, *count).map_err(|e| schema("model.count", e.to_string()))?;
            ResolvedModel::Exciton { monomer_file: None, synthetic_seed: Some(*seed), monomers }
        }
    };
    let molecular = model.is_molecular();
    if cfg.command == Command::Quench && molecular {
        return Err(schema("model.type", "quench requires a tfi model"));
    }
    if cfg.command == Command::OracleCompare && molecular {
        return Err(schema("model.type", "oracle-compare requires a tfi model"));
    }

    let v = &cfg.vqa;
    let depth = v.depth.map(|d| at_least_one("vqa.depth", d)).transpose()?;
    let vqa = ResolvedVqa {
        thermal_depth: at_least_one(
            "vqa.thermal_depth",
            v.thermal_depth.or(depth).unwrap_or(if molecular { DEFAULT_MOLECULAR_THERMAL_DEPTH } else { DEFAULT_DEPTH }),
        )?,
        dynamics_depth: at_least_one("vqa.dynamics_depth", v.dynamics_depth.or(depth).unwrap_or(DEFAULT_DEPTH))?,
        step: positive("vqa.step", v.step.unwrap_or(DEFAULT_STEP))?,
        regularization: non_negative(
            "vqa.regularization",
            v.regularization.unwrap_or(if molecular { DEFAULT_MOLECULAR_REGULARIZATION } else { DEFAULT_REGULARIZATION }),
        )?,
        thermal_regularization: non_negative(
            "vqa.thermal_regularization",
            v.thermal_regularization.unwrap_or(DEFAULT_THERMAL_REGULARIZATION),
        )?,
        integrator: v.integrator.unwrap_or(Integrator::Rk4),
        solver: v.solver.unwrap_or(LinearSolver::Cholesky),
        substeps: at_least_one(
            "vqa.substeps",
            v.substeps.unwrap_or(if molecular { DEFAULT_MOLECULAR_SUBSTEPS } else { 1 }),
        )?,
        estimator: v.estimator.unwrap_or(tfdvqa::dynamics::Estimator::Direct),
        shots: match v.shots {
            Some(0) => return Err(schema("vqa.shots", "must be >= 1")),
            s => s,
        },
        seed: v.seed.unwrap_or(0),
    };

    let r = &cfg.run;
    if r.beta.is_some() && r.temperature_k.is_some() {
        return Err(schema("run.temperature_k", "give either run.beta or run.temperature_k, not both"));
    }
    let temperature_k = match r.temperature_k {
        Some(t) => Some(positive("run.temperature_k", t)?),
        None if molecular && r.beta.is_none() => Some(DEFAULT_TEMPERATURE_K),
        None => None,
    };
    let beta = match (r.beta, temperature_k) {
        (Some(b), _) => non_negative("run.beta", b)?,
        (None, Some(t)) => models::beta_from_kelvin(t),
        (None, None) => DEFAULT_SPIN_BETA,
    };
    let betas = r.betas.clone().unwrap_or_else(|| DEFAULT_BETAS.to_vec());
    if betas.is_empty() {
        return Err(schema("run.betas", "must not be empty"));
    }
    for (i, b) in betas.iter().enumerate() {
        non_negative(&format!("run.betas[{i}]"), *b)?;
    }
    let n_physical = match &model {
        ResolvedModel::Tfi { n_sites, .. } => *n_sites,
        ResolvedModel::Exciton { monomers, .. } => monomers.len(),
    };
    let site = r.site.unwrap_or(0);
    if site >= n_physical {
        return Err(schema("run.site", format!("must be < {n_physical}, got {site}")));
    }
    let run = ResolvedRun {
        beta,
        temperature_k,
        t_max: positive("run.t_max", r.t_max.unwrap_or(if molecular { DEFAULT_MOLECULAR_T_MAX } else { DEFAULT_SPIN_T_MAX }))?,
        dt: positive("run.dt", r.dt.unwrap_or(if molecular { DEFAULT_MOLECULAR_DT } else { DEFAULT_SPIN_DT }))?,
        tau: positive("run.tau", r.tau.unwrap_or(DEFAULT_TAU))?,
        betas,
        axis: r.axis.unwrap_or(Axis::X),
        site,
        hbar: if molecular { models::HBAR_EV_FS } else { 1.0 },
    };
    if run.dt > run.t_max {
        return Err(schema("run.dt", "must not exceed run.t_max"));
    }

    let o = &cfg.output;
    let formats = o.formats.clone().unwrap_or_else(|| vec![Format::Csv]);
    if formats.is_empty() {
        return Err(schema("output.formats", "must not be empty"));
    }
    let directory = match (output_override, &o.directory) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(d)) if d.is_absolute() => d.clone(),
        (None, Some(d)) => base.join(d),
        (None, None) => base.join("out"),
    };
    Ok(ResolvedConfig { command: cfg.command, model, vqa, run, output: ResolvedOutput { directory, formats } })
}

fn non_negative(key: &str, v: f64) -> Result<f64, SchemaError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(schema(key, format!("must be finite and >= 0, got {v}")))
    }
}
