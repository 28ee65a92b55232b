//! Experiment, analysis and trade-off configuration documents (TOML).

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rsgd::data::{DatasetKind, DatasetSpec, ProblemKind};
use rsgd::schedule::{validate_pair, BatchSchedule, LrSchedule};
use rsgd::{Init, ManifoldDescriptor, RsgdConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// The `[problem]` section: a dataset spec plus the objective it feeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawProblem", into = "RawProblem")]
pub struct ProblemSection {
    pub data: DatasetSpec,
    /// Defaults to the natural objective of the dataset kind.
    pub objective: Option<ProblemKind>,
    /// Columns of the iterate; 1 for the sphere.
    pub r: usize,
}

fn default_density() -> f64 {
    1.0
}

// Flat on-disk layout; `flatten` would silently accept unknown keys.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    kind: DatasetKind,
    #[serde(rename = "N", default)]
    num_samples: usize,
    #[serde(default)]
    n: usize,
    #[serde(default)]
    r_true: usize,
    #[serde(default)]
    noise: f64,
    #[serde(default = "default_density")]
    mask_density: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    path: Option<String>,
    #[serde(default)]
    normalize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    objective: Option<ProblemKind>,
    r: usize,
}

impl From<RawProblem> for ProblemSection {
    fn from(raw: RawProblem) -> Self {
        ProblemSection {
            data: DatasetSpec {
                kind: raw.kind,
                num_samples: raw.num_samples,
                n: raw.n,
                r_true: raw.r_true,
                noise: raw.noise,
                mask_density: raw.mask_density,
                seed: raw.seed,
                path: raw.path,
                normalize: raw.normalize,
            },
            objective: raw.objective,
            r: raw.r,
        }
    }
}

impl From<ProblemSection> for RawProblem {
    fn from(p: ProblemSection) -> Self {
        let d = p.data;
        RawProblem {
            kind: d.kind,
            num_samples: d.num_samples,
            n: d.n,
            r_true: d.r_true,
            noise: d.noise,
            mask_density: d.mask_density,
            seed: d.seed,
            path: d.path,
            normalize: d.normalize,
            objective: p.objective,
            r: p.r,
        }
    }
}

impl ProblemSection {
    pub fn objective(&self) -> ProblemKind {
        self.objective.unwrap_or_else(|| self.data.kind.default_problem())
    }
}

fn default_eval_period() -> usize {
    1
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_name() -> String {
    "run".into()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// The `[run]` section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(rename = "T")]
    pub total: usize,
    #[serde(default = "default_eval_period")]
    pub eval_period: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// One label per seed; defaults to `<name>-s<seed>`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
    /// Experiment name, used as the label in comparisons.
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

/// A full experiment: data, objective, schedules and the runs to execute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSection,
    pub lr: LrSchedule,
    pub bs: BatchSchedule,
    pub run: RunSection,
}

fn check_label(label: &str) -> CliResult<()> {
    if label.is_empty() || label.contains(['/', '\\']) || label == "." || label == ".." {
        return Err(CliError::Config(format!("label '{label}' is not a valid file name")));
    }
    Ok(())
}

pub(crate) fn parse_toml<T: DeserializeOwned>(text: &str, origin: &str) -> CliResult<T> {
    toml::from_str(text).map_err(|e| CliError::ConfigParse { path: origin.into(), message: e.to_string() })
}

pub(crate) fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("cannot read {}", path.display()), e))
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig = parse_toml(text, "<config>")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> CliResult<Self> {
        let path = path.as_ref();
        let cfg: ExperimentConfig = parse_toml(&read_text(path)?, &path.display().to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("cannot encode configuration: {e}")))
    }

    /// Replaces the seed list; explicit labels are dropped in favour of the defaults.
    pub fn with_seeds(mut self, seeds: Vec<u64>) -> Self {
        self.run.seeds = seeds;
        self.run.labels.clear();
        self
    }

    /// Effective run labels, one per seed.
    pub fn labels(&self) -> Vec<String> {
        if self.run.labels.is_empty() {
            self.run.seeds.iter().map(|s| format!("{}-s{s}", self.run.name)).collect()
        } else {
            self.run.labels.clone()
        }
    }

    /// Checks every invariant that can be checked before data is generated.
    pub fn validate(&self) -> CliResult<()> {
        let run = &self.run;
        if run.total == 0 {
            return Err(CliError::Config("run.T must be at least 1".into()));
        }
        if run.eval_period == 0 {
            return Err(CliError::Config("run.eval_period must be at least 1".into()));
        }
        if run.seeds.is_empty() {
            return Err(CliError::Config("run.seeds must not be empty".into()));
        }
        if !run.labels.is_empty() && run.labels.len() != run.seeds.len() {
            return Err(CliError::Config(format!(
                "run.labels has {} entries for {} seeds",
                run.labels.len(),
                run.seeds.len()
            )));
        }
        check_label(&run.name)?;
        let labels = self.labels();
        let mut seen = HashSet::new();
        for label in &labels {
            check_label(label)?;
            if !seen.insert(label) {
                return Err(CliError::Config(format!("labels must be unique; '{label}' repeats")));
            }
        }
        if self.problem.r == 0 {
            return Err(CliError::Config("problem.r must be at least 1".into()));
        }
        if self.problem.objective() == ProblemKind::SqrtAbs && self.problem.r != 1 {
            return Err(CliError::Config(format!("the sqrt-abs objective needs r = 1, got {}", self.problem.r)));
        }
        validate_pair(&self.lr, &self.bs, run.total, None).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Optimizer configuration for one seed.
    pub fn rsgd_config(&self, seed: u64, manifold: ManifoldDescriptor) -> RsgdConfig {
        RsgdConfig {
            total: self.run.total,
            seed,
            lr: self.lr.clone(),
            bs: self.bs.clone(),
            eval_period: self.run.eval_period,
            manifold,
            init: Init::RandomOrthonormal,
        }
    }
}

/// Inputs of the bound evaluation, the `[analysis]` section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub f0_gap: f64,
    #[serde(rename = "L_r")]
    pub l_r: f64,
    pub sigma_sq: f64,
    #[serde(rename = "T")]
    pub total: usize,
    /// Target `‖grad‖ ≤ ε` for the SFO report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub analysis: AnalysisSection,
    pub lr: LrSchedule,
    pub bs: BatchSchedule,
}

impl AnalyzeConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        parse_toml(text, "<config>")
    }

    pub fn load(path: impl AsRef<Path>) -> CliResult<Self> {
        let path = path.as_ref();
        parse_toml(&read_text(path)?, &path.display().to_string())
    }
}

fn default_gammas() -> Vec<f64> {
    (0..=17).map(|k| 1.5 + 0.5 * k as f64).collect()
}

fn default_b0s() -> Vec<f64> {
    (1..=12).map(|k| (1u64 << k) as f64).collect()
}

fn default_ms() -> Vec<f64> {
    (1..=10).map(|m| m as f64).collect()
}

fn default_gamma_fixed() -> f64 {
    3.0
}

/// Grids of the trade-off tables, the `[tradeoff]` section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TradeoffSection {
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
    #[serde(default = "default_b0s")]
    pub b0s: Vec<f64>,
    #[serde(default = "default_ms")]
    pub ms: Vec<f64>,
    #[serde(default = "default_gamma_fixed")]
    pub gamma_fixed: f64,
}

impl Default for TradeoffSection {
    fn default() -> Self {
        TradeoffSection {
            gammas: default_gammas(),
            b0s: default_b0s(),
            ms: default_ms(),
            gamma_fixed: default_gamma_fixed(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TradeoffConfig {
    #[serde(default)]
    pub tradeoff: TradeoffSection,
}

impl TradeoffConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        parse_toml(text, "<config>")
    }

    pub fn load(path: impl AsRef<Path>) -> CliResult<Self> {
        let path = path.as_ref();
        parse_toml(&read_text(path)?, &path.display().to_string())
    }
}
