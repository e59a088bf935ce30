//! `key = value` experiment configuration. Blank lines and `#` comments are
//! ignored; list-valued keys (`value`, `strategy`, `size`, `weight`) are given
//! once per element. See the README for the full key table.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::harness::community::GirvanNewmanParams;
use crate::harness::io::Indexing;
use crate::interventions::Strategy;
use crate::linalg::Matrix;
use crate::models::{power_law_from_degrees, GraphModel, ModelKind, ProbabilityOverflow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key '{key}' (line {line})")]
    UnknownKey { key: String, line: usize },
    #[error("key '{key}' given more than once (line {line})")]
    Duplicate { key: String, line: usize },
    #[error("missing required key '{0}'")]
    Missing(&'static str),
    #[error("bad value for '{key}': {message}")]
    Value { key: String, message: String },
}

const LIST_KEYS: [&str; 4] = ["value", "strategy", "size", "weight"];
const SCALAR_KEYS: [&str; 32] = [
    "model",
    "n",
    "p",
    "sigma",
    "d_max",
    "d_min",
    "p_in",
    "p_out",
    "edge_list",
    "indexing",
    "compact",
    "self_loops",
    "clip",
    "axis",
    "trials",
    "seed",
    "beta_mode",
    "beta",
    "radius",
    "budget",
    "budget_mode",
    "b",
    "workers",
    "est_epsilon",
    "est_delta",
    "walk_samples",
    "samples_per_group",
    "c_mix",
    "gn_min_big",
    "gn_min_size",
    "gn_max_clusters",
    "graph_id",
];

/// Parsed key/value pairs; lists keep file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    scalars: BTreeMap<String, String>,
    lists: BTreeMap<String, Vec<String>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                message: "expected 'key = value'".into(),
            })?;
            raw.insert(key.trim(), value.trim(), line_no)?;
        }
        Ok(raw)
    }

    /// Pairs such as `["model=gnp", "n=100"]` from the command line.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[S]) -> Result<Self, ConfigError> {
        Self::parse(&pairs.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join("\n"))
    }

    fn insert(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        if value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                message: format!("empty value for '{key}'"),
            });
        }
        if LIST_KEYS.contains(&key) {
            self.lists.entry(key.to_string()).or_default().push(value.to_string());
        } else if SCALAR_KEYS.contains(&key) {
            if self.scalars.insert(key.to_string(), value.to_string()).is_some() {
                return Err(ConfigError::Duplicate {
                    key: key.to_string(),
                    line,
                });
            }
        } else {
            return Err(ConfigError::UnknownKey {
                key: key.to_string(),
                line,
            });
        }
        Ok(())
    }

    fn get_str(&self, key: &str) -> Option<&str> {
        self.scalars.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get_str(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| ConfigError::Value {
                    key: key.to_string(),
                    message: format!("'{v}': {e}"),
                })
            })
            .transpose()
    }

    fn require<T: FromStr>(&self, key: &'static str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.ok_or(ConfigError::Missing(key))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.lists
            .get(key)
            .map(|vals| {
                vals.iter()
                    .map(|v| {
                        v.parse::<T>().map_err(|e| ConfigError::Value {
                            key: key.to_string(),
                            message: format!("'{v}': {e}"),
                        })
                    })
                    .collect()
            })
            .unwrap_or_else(|| Ok(Vec::new()))
    }
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Graph source for an experiment or the `generate` command.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Gnp { n: usize, p: f64 },
    Gw { weights: Vec<f64> },
    PowerLaw { n: usize, sigma: f64, d_max: f64, d_min: f64 },
    Sbm { sizes: Vec<usize>, p_in: f64, p_out: f64 },
    EdgeList { path: PathBuf, indexing: Indexing, compact: bool },
}

impl ModelSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::Gnp { .. } => "gnp",
            ModelSpec::Gw { .. } => "gw",
            ModelSpec::PowerLaw { .. } => "power_law",
            ModelSpec::Sbm { .. } => "sbm",
            ModelSpec::EdgeList { .. } => "edge_list",
        }
    }

    fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let family: String = raw.require("model")?;
        Ok(match family.as_str() {
            "gnp" => ModelSpec::Gnp {
                n: raw.require("n")?,
                p: raw.require("p")?,
            },
            "gw" => {
                let weights: Vec<f64> = raw.list("weight")?;
                if weights.is_empty() {
                    return Err(ConfigError::Missing("weight"));
                }
                ModelSpec::Gw { weights }
            }
            "power_law" => ModelSpec::PowerLaw {
                n: raw.require("n")?,
                sigma: raw.require("sigma")?,
                d_max: raw.require("d_max")?,
                d_min: raw.require("d_min")?,
            },
            "sbm" => {
                let sizes: Vec<usize> = raw.list("size")?;
                if sizes.is_empty() {
                    return Err(ConfigError::Missing("size"));
                }
                ModelSpec::Sbm {
                    sizes,
                    p_in: raw.require("p_in")?,
                    p_out: raw.require("p_out")?,
                }
            }
            "edge_list" => ModelSpec::EdgeList {
                path: PathBuf::from(raw.require::<String>("edge_list")?),
                indexing: raw.get("indexing")?.unwrap_or_default(),
                compact: raw.get("compact")?.unwrap_or(false),
            },
            other => return Err(bad("model", format!("unknown family '{other}'"))),
        })
    }

    /// Same family with its density parameter replaced (`p`, `sigma`, or `p_in`).
    pub fn with_density(&self, value: f64) -> Result<Self, ConfigError> {
        let mut out = self.clone();
        match &mut out {
            ModelSpec::Gnp { p, .. } => *p = value,
            ModelSpec::PowerLaw { sigma, .. } => *sigma = value,
            ModelSpec::Sbm { p_in, .. } => *p_in = value,
            _ => return Err(bad("axis", format!("density axis is undefined for model '{}'", self.family()))),
        }
        Ok(out)
    }

    /// Random-graph model, or `None` for an edge-list source.
    pub fn build(&self, self_loops: bool, clip: bool) -> Result<Option<GraphModel>, ConfigError> {
        let overflow = if clip {
            ProbabilityOverflow::Clip
        } else {
            ProbabilityOverflow::Reject
        };
        let kind = match self {
            ModelSpec::EdgeList { .. } => return Ok(None),
            ModelSpec::Gnp { n, p } => ModelKind::Gnp { n: *n, p: *p },
            ModelSpec::Gw { weights } => ModelKind::Gw {
                weights: weights.clone(),
            },
            ModelSpec::PowerLaw { n, sigma, d_max, d_min } => {
                let (c, offset) =
                    power_law_from_degrees(*n, *sigma, *d_max, *d_min).map_err(|e| bad("model", e.to_string()))?;
                ModelKind::PowerLaw {
                    n: *n,
                    sigma: *sigma,
                    c,
                    offset,
                }
            }
            ModelSpec::Sbm { sizes, p_in, p_out } => {
                let m = sizes.len();
                ModelKind::Sbm {
                    sizes: sizes.clone(),
                    probabilities: Matrix::from_fn(m, m, |a, b| if a == b { *p_in } else { *p_out }),
                }
            }
        };
        let model = GraphModel {
            kind,
            allow_self_loops: self_loops,
            overflow,
        };
        model.validate().map_err(|e| bad("model", e.to_string()))?;
        Ok(Some(model))
    }
}

/// Generator settings for the `generate` command: a random-graph model and a seed.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub model: GraphModel,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let spec = ModelSpec::from_raw(raw)?;
        let model = spec
            .build(raw.get("self_loops")?.unwrap_or(false), raw.get("clip")?.unwrap_or(false))?
            .ok_or_else(|| bad("model", "edge_list is not a generator"))?;
        Ok(Self {
            model,
            seed: raw.get("seed")?.unwrap_or(0),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Budget,
    Density,
    Radius,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Budget => "budget",
            Axis::Density => "density",
            Axis::Radius => "radius",
        }
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "budget" => Ok(Axis::Budget),
            "density" | "density_param" => Ok(Axis::Density),
            "radius" | "spectral_radius" => Ok(Axis::Radius),
            other => Err(format!("unknown axis '{other}'")),
        }
    }
}

/// How `beta` is chosen for each realized graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSpec {
    Absolute(f64),
    /// `beta = r / lambda_1(A)` for the realized `A`.
    Radius(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetMode {
    /// `C = value * n`.
    Scaled,
    Absolute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub self_loops: bool,
    pub clip: bool,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub trials: usize,
    pub seed: u64,
    pub beta: BetaSpec,
    pub budget: f64,
    pub budget_mode: BudgetMode,
    pub b: f64,
    pub workers: usize,
    pub est_epsilon: f64,
    pub est_delta: f64,
    pub walk_samples: usize,
    pub samples_per_group: usize,
    pub c_mix: f64,
    pub girvan_newman: GirvanNewmanParams,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let model = ModelSpec::from_raw(raw)?;
        let axis: Axis = raw.require("axis")?;
        let values: Vec<f64> = raw.list("value")?;
        if values.is_empty() {
            return Err(ConfigError::Missing("value"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(bad("value", format!("axis values must be finite and nonnegative, got {v}")));
        }
        let strategies: Vec<Strategy> = raw.list("strategy")?;
        if strategies.is_empty() {
            return Err(ConfigError::Missing("strategy"));
        }
        let trials: usize = raw.get("trials")?.unwrap_or(10);
        if trials == 0 {
            return Err(bad("trials", "must be at least 1"));
        }
        let beta_mode: String = raw.get("beta_mode")?.unwrap_or_else(|| "radius".to_string());
        let beta = match beta_mode.as_str() {
            "radius" => BetaSpec::Radius(raw.get("radius")?.unwrap_or(0.8)),
            "absolute" => BetaSpec::Absolute(raw.require("beta")?),
            other => return Err(bad("beta_mode", format!("expected 'radius' or 'absolute', got '{other}'"))),
        };
        let budget_mode = match raw.get::<String>("budget_mode")?.as_deref().unwrap_or("scaled") {
            "scaled" => BudgetMode::Scaled,
            "absolute" => BudgetMode::Absolute,
            other => return Err(bad("budget_mode", format!("expected 'scaled' or 'absolute', got '{other}'"))),
        };
        let defaults = GirvanNewmanParams::default();
        let cfg = Self {
            model,
            self_loops: raw.get("self_loops")?.unwrap_or(false),
            clip: raw.get("clip")?.unwrap_or(false),
            axis,
            values,
            strategies,
            trials,
            seed: raw.get("seed")?.unwrap_or(0),
            beta,
            budget: raw.get("budget")?.unwrap_or(1.0),
            budget_mode,
            b: raw.get("b")?.unwrap_or(1.0),
            workers: raw.get("workers")?.unwrap_or(1),
            est_epsilon: raw.get("est_epsilon")?.unwrap_or(0.1),
            est_delta: raw.get("est_delta")?.unwrap_or(0.05),
            walk_samples: raw.get("walk_samples")?.unwrap_or(20_000),
            samples_per_group: raw.get("samples_per_group")?.unwrap_or(10_000),
            c_mix: raw.get("c_mix")?.unwrap_or(crate::estimation::DEFAULT_C_MIX),
            girvan_newman: GirvanNewmanParams {
                min_big_clusters: raw.get("gn_min_big")?.unwrap_or(defaults.min_big_clusters),
                min_cluster_size: raw.get("gn_min_size")?.unwrap_or(defaults.min_cluster_size),
                max_clusters: raw.get("gn_max_clusters")?.unwrap_or(defaults.max_clusters),
            },
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.workers == 0 {
            return Err(bad("workers", "must be at least 1"));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(bad("b", "must be finite and nonnegative"));
        }
        if !(self.budget >= 0.0 && self.budget.is_finite()) {
            return Err(bad("budget", "must be finite and nonnegative"));
        }
        match self.beta {
            BetaSpec::Absolute(b) | BetaSpec::Radius(b) if !(b >= 0.0 && b.is_finite()) => {
                return Err(bad("beta", "beta and radius must be finite and nonnegative"));
            }
            _ => {}
        }
        for (key, v) in [("est_epsilon", self.est_epsilon), ("est_delta", self.est_delta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(bad(key, "must lie in (0, 1)"));
            }
        }
        if self.axis == Axis::Density {
            self.model.with_density(self.values[0])?;
        }
        let needs_model = self
            .strategies
            .iter()
            .any(|s| matches!(s, Strategy::ExpectedDegree | Strategy::FirstEigenvectorExpected));
        if needs_model && matches!(self.model, ModelSpec::EdgeList { .. }) {
            return Err(bad("strategy", "expected-matrix strategies need a random-graph model"));
        }
        if self.strategies.contains(&Strategy::Custom) {
            return Err(bad("strategy", "'custom' has no definition in an experiment"));
        }
        // Validate the model once with the first axis value so bad parameters fail early.
        let probe = match self.axis {
            Axis::Density => self.model.with_density(self.values[0])?,
            _ => self.model.clone(),
        };
        probe.build(self.self_loops, self.clip)?;
        Ok(())
    }

    /// Budget `C` for a graph on `n` vertices at an axis value.
    pub fn budget_for(&self, n: usize, axis_value: f64) -> f64 {
        let c = if self.axis == Axis::Budget { axis_value } else { self.budget };
        match self.budget_mode {
            BudgetMode::Scaled => c * n as f64,
            BudgetMode::Absolute => c,
        }
    }

    pub fn beta_for(&self, axis_value: f64) -> BetaSpec {
        match self.axis {
            Axis::Radius => BetaSpec::Radius(axis_value),
            _ => self.beta,
        }
    }
}
