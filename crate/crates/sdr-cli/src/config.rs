//! Experiment configuration: a sectioned UTF-8 TOML file with a fixed
//! schema. Unknown keys are rejected outright and every semantic failure
//! names the offending key.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("config key `{key}`: {detail}")]
    Invalid { key: String, detail: String },
    #[error(
        "unknown method `{given}` (expected sdr, attribute_descent, random_search, \
         random_attributes, or exhaustive)"
    )]
    UnknownMethod { given: String },
    #[error("unknown ablation flag `{flag}` (expected no_relaxation, single_group, \
             shuffle_groups, drop_environment, drop_position, or drop_density)")]
    UnknownFlag { flag: String },
}

fn invalid(key: &str, detail: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Sdr,
    AttributeDescent,
    RandomSearch,
    RandomAttributes,
    Exhaustive,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Sdr => "sdr",
            Method::AttributeDescent => "attribute_descent",
            Method::RandomSearch => "random_search",
            Method::RandomAttributes => "random_attributes",
            Method::Exhaustive => "exhaustive",
        }
    }
}

impl FromStr for Method {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "sdr" => Ok(Method::Sdr),
            "attribute_descent" => Ok(Method::AttributeDescent),
            "random_search" => Ok(Method::RandomSearch),
            "random_attributes" => Ok(Method::RandomAttributes),
            "exhaustive" => Ok(Method::Exhaustive),
            other => Err(ConfigError::UnknownMethod {
                given: other.to_string(),
            }),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ablation switches accepted by the `ablate` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AblationFlag {
    NoRelaxation,
    SingleGroup,
    ShuffleGroups,
    DropEnvironment,
    DropPosition,
    DropDensity,
}

impl AblationFlag {
    pub const ALL: [AblationFlag; 6] = [
        AblationFlag::NoRelaxation,
        AblationFlag::SingleGroup,
        AblationFlag::ShuffleGroups,
        AblationFlag::DropEnvironment,
        AblationFlag::DropPosition,
        AblationFlag::DropDensity,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AblationFlag::NoRelaxation => "no_relaxation",
            AblationFlag::SingleGroup => "single_group",
            AblationFlag::ShuffleGroups => "shuffle_groups",
            AblationFlag::DropEnvironment => "drop_environment",
            AblationFlag::DropPosition => "drop_position",
            AblationFlag::DropDensity => "drop_density",
        }
    }
}

impl FromStr for AblationFlag {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "no_relaxation" => Ok(AblationFlag::NoRelaxation),
            "single_group" => Ok(AblationFlag::SingleGroup),
            "shuffle_groups" => Ok(AblationFlag::ShuffleGroups),
            "drop_environment" => Ok(AblationFlag::DropEnvironment),
            "drop_position" => Ok(AblationFlag::DropPosition),
            "drop_density" => Ok(AblationFlag::DropDensity),
            other => Err(ConfigError::UnknownFlag {
                flag: other.to_string(),
            }),
        }
    }
}

fn default_reps() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_checkpoint_every() -> u64 {
    10
}

fn default_descent_passes() -> usize {
    1
}

fn default_enumeration_cap() -> u64 {
    sdr_core::DEFAULT_ENUMERATION_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Method for `run`; `compare` uses `methods` instead.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub methods: Vec<String>,
    pub benchmark: String,
    /// Master seed; every repetition derives its own stream from it.
    pub seed: u64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    pub out_dir: String,
    /// Random-search draw count, and the shared cap under --equal-budget.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default)]
    pub equal_budget: bool,
    /// Write seed-determined CSVs (wall_ms column zeroed); real timings go
    /// to the summary.
    #[serde(default = "default_true")]
    pub deterministic_output: bool,
    /// Steps between rolling checkpoints; 0 disables checkpointing.
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: u64,
    /// Testing hook: halt after this many steps of one repetition with a
    /// checkpoint written; 0 runs to completion.
    #[serde(default)]
    pub stop_after_updates: u64,
    #[serde(default = "default_descent_passes")]
    pub descent_passes: usize,
    #[serde(default = "default_enumeration_cap")]
    pub enumeration_cap: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SdrSection {
    pub samples_per_update: usize,
    pub updates_per_group: usize,
    pub learning_rate: f64,
    pub half_width_frac: f64,
    pub hidden_dims: Vec<usize>,
    pub baseline_decay: f64,
    pub passes: usize,
    pub baseline_first: bool,
    pub no_relaxation: bool,
    pub single_group: bool,
    pub shuffle_groups: bool,
}

impl Default for SdrSection {
    fn default() -> Self {
        let d = sdr_core::SdrConfig::default();
        Self {
            samples_per_update: d.samples_per_update,
            updates_per_group: d.updates_per_group,
            learning_rate: d.learning_rate,
            half_width_frac: d.half_width_frac,
            hidden_dims: d.hidden_dims,
            baseline_decay: d.baseline_decay,
            passes: d.passes,
            baseline_first: d.baseline_first,
            no_relaxation: d.no_relaxation,
            single_group: d.single_group,
            shuffle_groups: d.shuffle_groups,
        }
    }
}

impl SdrSection {
    pub fn to_core(&self) -> sdr_core::SdrConfig {
        sdr_core::SdrConfig {
            samples_per_update: self.samples_per_update,
            updates_per_group: self.updates_per_group,
            learning_rate: self.learning_rate,
            half_width_frac: self.half_width_frac,
            hidden_dims: self.hidden_dims.clone(),
            baseline_decay: self.baseline_decay,
            passes: self.passes,
            baseline_first: self.baseline_first,
            no_relaxation: self.no_relaxation,
            single_group: self.single_group,
            shuffle_groups: self.shuffle_groups,
        }
    }
}

/// Optional per-experiment knobs layered over a builtin benchmark.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OverridesSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_train: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_val: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_test: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_seed: Option<u64>,
    /// Explicit group plan; replaces the benchmark's default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AblationSection {
    pub flags: Vec<String>,
}

/// Custom attribute definition: replaces a scene benchmark's search space.
/// `role` names the scene knob the attribute drives, e.g. `offset:person`,
/// `interval:car`, `occurrence:tree`, `camera_x`, `camera_y`,
/// `illumination`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeEntry {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub num_bins: usize,
    pub family: String,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub sdr: SdrSection,
    #[serde(default)]
    pub benchmark_overrides: OverridesSection,
    #[serde(default)]
    pub ablation: AblationSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attributes: Vec<AttributeEntry>,
}

impl ExperimentConfig {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        Self::from_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let e = &self.experiment;
        if e.reps == 0 {
            return Err(invalid("experiment.reps", "must be at least 1"));
        }
        if let Some(method) = &e.method {
            method.parse::<Method>()?;
        }
        for m in &e.methods {
            m.parse::<Method>()?;
        }
        if let Some(budget) = e.budget {
            if budget == 0 {
                return Err(invalid("experiment.budget", "must be positive when set"));
            }
        }
        if e.equal_budget && e.budget.is_none() {
            return Err(invalid(
                "experiment.budget",
                "required when equal_budget is enabled",
            ));
        }
        if e.descent_passes == 0 {
            return Err(invalid("experiment.descent_passes", "must be at least 1"));
        }
        self.sdr
            .to_core()
            .validate()
            .map_err(|err| invalid("sdr", err.to_string()))?;
        for flag in &self.ablation.flags {
            flag.parse::<AblationFlag>()?;
        }
        if let Some(m) = self.benchmark_overrides.m_train {
            if m == 0 {
                return Err(invalid("benchmark_overrides.m_train", "must be at least 1"));
            }
        }
        if let Some(m) = self.benchmark_overrides.m_val {
            if m == 0 {
                return Err(invalid("benchmark_overrides.m_val", "must be at least 1"));
            }
        }
        for (i, attr) in self.attributes.iter().enumerate() {
            let key = format!("attributes[{i}]");
            if attr.lo >= attr.hi {
                return Err(invalid(&key, "lo must be strictly below hi"));
            }
            if attr.num_bins < 2 {
                return Err(invalid(&key, "num_bins must be at least 2"));
            }
            attr.family
                .parse::<sdr_core::Family>()
                .map_err(|err| invalid(&key, err.to_string()))?;
        }
        Ok(())
    }

    /// Parsed method for `run`; errors when missing.
    pub fn run_method(&self) -> Result<Method, ConfigError> {
        match &self.experiment.method {
            Some(m) => m.parse(),
            None => Err(invalid("experiment.method", "required for `run`")),
        }
    }

    /// Parsed method list for `compare`; needs at least two entries.
    pub fn compare_methods(&self) -> Result<Vec<Method>, ConfigError> {
        let methods: Vec<Method> = self
            .experiment
            .methods
            .iter()
            .map(|m| m.parse())
            .collect::<Result<_, _>>()?;
        if methods.len() < 2 {
            return Err(invalid(
                "experiment.methods",
                "compare needs at least two methods",
            ));
        }
        Ok(methods)
    }

    pub fn ablation_flags(&self) -> Result<Vec<AblationFlag>, ConfigError> {
        self.ablation.flags.iter().map(|f| f.parse()).collect()
    }
}
