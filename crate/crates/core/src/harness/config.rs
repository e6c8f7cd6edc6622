use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithm::Algorithm;
use crate::error::{Error, Result};
use crate::model::{AlgorithmConfig, ProblemDefinition, DEFAULT_DELTA};
use crate::problems::{ProblemParams, ProblemRegistry};

/// A problem name plus its parameters, as written in the experiment file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "ProblemParams::is_empty")]
    pub params: ProblemParams,
}

impl ProblemSpec {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            params: ProblemParams::new(),
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    /// File-system friendly name, e.g. `CORRIDOR-D10`.
    pub fn label(&self) -> String {
        let mut s = self.name.clone();
        for (k, v) in &self.params {
            s.push('-');
            s.push_str(k);
            s.push_str(&format!("{v}"));
        }
        s
    }

    pub fn build(&self, registry: &ProblemRegistry) -> Result<ProblemDefinition> {
        registry.get(&self.name, &self.params)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorParams {
    #[serde(default = "one")]
    pub pc: f64,
    /// Per-variable mutation probability; `1/D` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pm: Option<f64>,
    #[serde(default = "twenty")]
    pub eta_c: f64,
    #[serde(default = "twenty")]
    pub eta_m: f64,
}

impl Default for OperatorParams {
    fn default() -> Self {
        Self {
            pc: 1.0,
            pm: None,
            eta_c: 20.0,
            eta_m: 20.0,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn twenty() -> f64 {
    20.0
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_reference_points() -> usize {
    500
}

/// Experiment description, read from TOML:
///
/// ```toml
/// algorithms = ["atmr", "nsga2_cdp"]
/// n = 100
/// max_fes = 20000
/// runs = 10
/// base_seed = 1
/// output_dir = "out"
///
/// [[problems]]
/// name = "BNH"
///
/// [[problems]]
/// name = "CORRIDOR"
/// params = { D = 10 }
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub n: usize,
    pub max_fes: u64,
    pub runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Size of the reference front sample used for IGD.
    #[serde(default = "default_reference_points")]
    pub reference_points: usize,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub operators: OperatorParams,
    pub problems: Vec<ProblemSpec>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if cfg.output_dir.is_relative() {
            if let Some(parent) = path.parent() {
                cfg.output_dir = parent.join(&cfg.output_dir);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    /// Seed of run `run_index` (zero based).
    pub fn seed_for(&self, run_index: usize) -> u64 {
        self.base_seed.wrapping_add(run_index as u64)
    }

    pub fn algorithm_config(
        &self,
        problem: &ProblemDefinition,
        run_index: usize,
    ) -> AlgorithmConfig {
        AlgorithmConfig {
            n: self.n,
            max_fes: self.max_fes,
            delta: self.delta,
            pc: self.operators.pc,
            pm: self.operators.pm.unwrap_or(1.0 / problem.n_var() as f64),
            eta_c: self.operators.eta_c,
            eta_m: self.operators.eta_m,
            seed: self.seed_for(run_index),
        }
    }

    /// Checks everything that can be checked without running: counts, problem
    /// names and parameters, and per-problem algorithm settings.
    pub fn validate(&self, registry: &ProblemRegistry) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms configured".into()));
        }
        if self.problems.is_empty() {
            return Err(Error::Config("no problems configured".into()));
        }
        if self.reference_points == 0 {
            return Err(Error::Config("reference_points must be positive".into()));
        }
        let mut labels = std::collections::BTreeSet::new();
        for spec in &self.problems {
            let problem = spec.build(registry).map_err(|e| match e {
                Error::UnknownProblem { .. } => Error::Config(e.to_string()),
                other => other,
            })?;
            self.algorithm_config(&problem, 0).validate()?;
            if !labels.insert(spec.label()) {
                return Err(Error::Config(format!(
                    "problem `{}` listed twice",
                    spec.label()
                )));
            }
        }
        Ok(())
    }
}
