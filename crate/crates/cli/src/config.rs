//! Experiment configuration files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use basinctl_core::basin::{Tolerance, DEFAULT_T_MAX};
use basinctl_core::control::{
    CensusSpec, ControlConfig, ControlProblem, EigenTarget, MeanDistanceTarget, SaddleTarget,
};
use basinctl_core::dynsys::{AffineConeSpec, DiffBackend};
use basinctl_core::equilibria::EquilibriumSelector;
use basinctl_core::mgda::GradientScaling;
use basinctl_core::models::{BuiltinModel, ModelName};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelBlock,
    #[serde(default)]
    pub census: CensusBlock,
    #[serde(default)]
    pub sensitivity: Option<SensitivityBlock>,
    #[serde(default)]
    pub control: Option<ControlBlock>,
    #[serde(default)]
    pub basin: Option<BasinBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub name: ModelName,
    /// Overrides of default parameter values, by name.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Make the EMT Hill exponent a controllable parameter.
    #[serde(default)]
    pub include_p: bool,
    #[serde(default)]
    pub backend: DiffBackend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensusBlock {
    /// Defaults to the model's reference box.
    #[serde(default)]
    pub bounds: Option<Vec<(f64, f64)>>,
    #[serde(default = "default_n_seeds")]
    pub n_seeds: usize,
    #[serde(default)]
    pub rng_seed: u64,
}

fn default_n_seeds() -> usize {
    400
}

impl Default for CensusBlock {
    fn default() -> Self {
        Self {
            bounds: None,
            n_seeds: default_n_seeds(),
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityBlock {
    pub equilibrium: EquilibriumSelector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Eigenvalue,
    Saddle,
    Multiobjective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlBlock {
    pub strategy: Strategy,
    pub attractor: EquilibriumSelector,
    #[serde(default)]
    pub eigen: Vec<EigenTarget>,
    #[serde(default)]
    pub saddles: Vec<SaddleTarget>,
    #[serde(default)]
    pub mean_distance: Option<MeanDistanceTarget>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_n_ite")]
    pub n_ite: usize,
    #[serde(default = "default_cone")]
    pub cone: AffineConeSpec,
    #[serde(default)]
    pub scaling: GradientScaling,
    #[serde(default)]
    pub complex_fatal: bool,
    #[serde(default = "default_rescan")]
    pub rescan_every: usize,
}

fn default_epsilon() -> f64 {
    1e-2
}

fn default_n_ite() -> usize {
    1000
}

fn default_cone() -> AffineConeSpec {
    AffineConeSpec::Full
}

fn default_rescan() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasinBlock {
    /// Sampling box; defaults to the census box.
    #[serde(default)]
    pub bounds: Option<Vec<(f64, f64)>>,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default)]
    pub tolerance: Tolerance,
    /// Also run the control block and estimate the basins at its final
    /// parameters.
    #[serde(default)]
    pub before_after: bool,
}

fn default_n_samples() -> usize {
    10_000
}

fn default_t_max() -> f64 {
    DEFAULT_T_MAX
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Replaces the census and basin seeds.
    pub fn override_seed(&mut self, seed: u64) {
        self.census.rng_seed = seed;
        if let Some(b) = &mut self.basin {
            b.rng_seed = seed;
        }
    }

    /// Builds the model and checks every block against it.
    pub fn resolve(&self) -> Result<Experiment, CliError> {
        let builtin = BuiltinModel::new(self.model.name, self.model.include_p);
        let model = builtin.model.as_ref();
        if self.model.include_p && self.model.name != ModelName::Emt {
            return Err(CliError::Config(
                "include_p only applies to the emt model".into(),
            ));
        }
        let mut params = builtin.defaults.clone();
        for (name, value) in &self.model.params {
            let i = model.param_index(name).ok_or_else(|| {
                CliError::Config(format!("unknown parameter {name:?} for this model"))
            })?;
            params[i] = *value;
        }
        model
            .check_params(&params)
            .map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.model.backend.fd_step > 0.0 && self.model.backend.fd_step.is_finite()) {
            return Err(CliError::Config("backend.fd_step must be positive".into()));
        }

        let census_bounds = self
            .census
            .bounds
            .clone()
            .unwrap_or_else(|| builtin.reference_box.clone());
        check_box("census.bounds", &census_bounds, model.state_dim())?;
        if self.census.n_seeds == 0 {
            return Err(CliError::Config("census.n_seeds must be at least 1".into()));
        }
        let census = CensusSpec::new(census_bounds, self.census.n_seeds, self.census.rng_seed);

        if let Some(s) = &self.sensitivity {
            check_anchor("sensitivity.equilibrium", &s.equilibrium, model.state_dim())?;
        }
        if let Some(c) = &self.control {
            c.check(model.state_dim(), model.param_dim())?;
        }
        if let Some(b) = &self.basin {
            if let Some(bounds) = &b.bounds {
                check_box("basin.bounds", bounds, model.state_dim())?;
            }
            if b.n_samples == 0 {
                return Err(CliError::Config(
                    "basin.n_samples must be at least 1".into(),
                ));
            }
            if !(b.t_max > 0.0 && b.t_max.is_finite()) {
                return Err(CliError::Config("basin.t_max must be positive".into()));
            }
            if !(b.tolerance.rtol > 0.0 && b.tolerance.atol > 0.0) {
                return Err(CliError::Config("basin tolerances must be positive".into()));
            }
            if b.before_after && self.control.is_none() {
                return Err(CliError::Config(
                    "basin.before_after requires a control block".into(),
                ));
            }
        }
        Ok(Experiment {
            config: self.clone(),
            builtin,
            params,
            census,
        })
    }
}

fn check_box(what: &str, bounds: &[(f64, f64)], dim: usize) -> Result<(), CliError> {
    if bounds.len() != dim {
        return Err(CliError::Config(format!(
            "{what} has {} intervals, the model has {dim} states",
            bounds.len()
        )));
    }
    if bounds
        .iter()
        .any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi))
    {
        return Err(CliError::Config(format!(
            "{what} contains an empty interval"
        )));
    }
    Ok(())
}

fn check_anchor(what: &str, sel: &EquilibriumSelector, dim: usize) -> Result<(), CliError> {
    if sel.near.len() != dim {
        return Err(CliError::Config(format!(
            "{what}.near has {} coordinates, the model has {dim} states",
            sel.near.len()
        )));
    }
    if matches!(sel.radius, Some(r) if !(r > 0.0)) {
        return Err(CliError::Config(format!("{what}.radius must be positive")));
    }
    Ok(())
}

impl ControlBlock {
    fn check(&self, state_dim: usize, param_dim: usize) -> Result<(), CliError> {
        let err = |m: &str| Err(CliError::Config(m.into()));
        check_anchor("control.attractor", &self.attractor, state_dim)?;
        for t in &self.saddles {
            check_anchor("control.saddles", &t.saddle, state_dim)?;
        }
        if let Some(m) = &self.mean_distance {
            if m.saddles.is_empty() {
                return err("control.mean_distance.saddles is empty");
            }
            for s in &m.saddles {
                check_anchor("control.mean_distance.saddles", s, state_dim)?;
            }
        }
        match self.strategy {
            Strategy::Eigenvalue => {
                if self.eigen.is_empty() || !self.saddles.is_empty() || self.mean_distance.is_some()
                {
                    return err("eigenvalue strategy takes eigen targets only");
                }
            }
            Strategy::Saddle => {
                if self.saddles.is_empty() || !self.eigen.is_empty() || self.mean_distance.is_some()
                {
                    return err("saddle strategy takes saddle targets only");
                }
            }
            Strategy::Multiobjective => {
                if self.eigen.is_empty() && self.saddles.is_empty() && self.mean_distance.is_none()
                {
                    return err("multiobjective strategy needs at least one target");
                }
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return err("control.epsilon must be positive");
        }
        if self.rescan_every == 0 {
            return err("control.rescan_every must be at least 1");
        }
        self.cone
            .validate(param_dim)
            .map_err(|e| CliError::Config(format!("control.cone: {e}")))
    }

    pub fn problem(&self) -> ControlProblem {
        ControlProblem {
            attractor: Some(self.attractor.clone()),
            eigen: self.eigen.clone(),
            saddles: self.saddles.clone(),
            mean_distance: self.mean_distance.clone(),
            preserve_stable: self.strategy == Strategy::Multiobjective,
        }
    }

    /// Number of tracked saddles: point targets first, then the saddles of
    /// the mean-distance target.
    pub fn n_distances(&self) -> usize {
        self.saddles.len() + self.mean_distance.as_ref().map_or(0, |m| m.saddles.len())
    }

    pub fn n_objectives(&self) -> usize {
        self.eigen.len() + self.saddles.len() + usize::from(self.mean_distance.is_some())
    }
}

/// A configuration checked against its model.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub builtin: BuiltinModel,
    pub params: DVector<f64>,
    pub census: CensusSpec,
}

impl Experiment {
    pub fn control_config(&self) -> Option<ControlConfig> {
        let c = self.config.control.as_ref()?;
        let mut cfg = ControlConfig::new(self.census.clone());
        cfg.epsilon = c.epsilon;
        cfg.n_ite = c.n_ite;
        cfg.cone = c.cone.clone();
        cfg.scaling = c.scaling;
        cfg.complex_fatal = c.complex_fatal;
        cfg.rescan_every = c.rescan_every;
        cfg.backend = self.config.model.backend;
        Some(cfg)
    }

    pub fn param_names(&self) -> &[String] {
        self.builtin.model.param_names()
    }
}
