//! Experiment configuration file (TOML). Unknown keys are rejected and the
//! physical constants K, ω, ℒ, A₀ and b have no defaults.

use serde::Deserialize;
use std::path::Path;

use crate::error::{Error, Result};
use crate::integrator::galerkin::{GalerkinSpec, SineBasis};
use crate::model::{Coefficient, JumpCoefficient, SdeModel, SemigroupSpec};
use crate::noise::{JumpMeasureSpec, WienerSpec};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "K")]
    pub k: f64,
    pub omega: f64,
    /// Decay rates of the diagonal semigroup; omit when `galerkin` is given.
    pub eigenvalues: Option<Vec<f64>>,
    pub galerkin: Option<GalerkinSpec>,
    #[serde(rename = "L")]
    pub lipschitz: f64,
    #[serde(rename = "A0")]
    pub a0: f64,
    pub p: f64,
    #[serde(default)]
    pub f: Coefficient,
    #[serde(default)]
    pub g: Coefficient,
    #[serde(default, rename = "F")]
    pub big_f: JumpCoefficient,
    #[serde(default, rename = "G")]
    pub big_g: JumpCoefficient,
    pub wiener: WienerSpec,
    pub jumps: JumpMeasureSpec,
}

impl ModelConfig {
    pub fn build(&self) -> Result<SdeModel> {
        let (eigenvalues, basis) = match (&self.eigenvalues, self.galerkin) {
            (Some(e), None) => (e.clone(), None),
            (None, Some(g)) => {
                let b = SineBasis::new(g)?;
                (b.eigenvalues(), Some(b))
            }
            _ => return Err(Error::Config { path: "model".into(), msg: "give exactly one of eigenvalues or galerkin".into() }),
        };
        let model = SdeModel {
            semigroup: SemigroupSpec { eigenvalues, k: self.k, omega: self.omega },
            f: self.f.clone(),
            g: self.g.clone(),
            big_f: self.big_f.clone(),
            big_g: self.big_g.clone(),
            wiener: self.wiener.clone(),
            jumps: self.jumps.clone(),
            a0: self.a0,
            lipschitz_l: self.lipschitz,
            moment_p: self.p,
            basis,
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub tol: f64,
    /// Initial state for `simulate`; zero when absent.
    pub y0: Option<Vec<f64>>,
    /// Output grid points on [t0, t1].
    pub n_points: usize,
}

impl RunConfig {
    pub fn grid(&self) -> Vec<f64> {
        let n = self.n_points.max(2);
        (0..n).map(|i| self.t0 + (self.t1 - self.t0) * i as f64 / (n - 1) as f64).collect()
    }

    fn validate(&self) -> Result<()> {
        let bad = |path: &str, msg: &str| Err(Error::Config { path: format!("run.{path}"), msg: msg.into() });
        if !(self.t1 > self.t0) {
            return bad("t1", "must exceed t0");
        }
        if !(self.step > 0.0) {
            return bad("step", "must be positive");
        }
        if self.n_paths == 0 {
            return bad("n_paths", "must be positive");
        }
        if !(self.tol > 0.0) {
            return bad("tol", "must be positive");
        }
        if self.n_points < 2 {
            return bad("n_points", "must be at least 2");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecurrenceConfig {
    pub epsilon: f64,
    pub scan_window: f64,
    pub tau_step: f64,
    pub sup_horizon: f64,
    pub t_step: f64,
    pub n_bootstrap: usize,
    /// Shift to test; the first accepted almost period when absent.
    pub tau: Option<f64>,
    #[serde(default = "one")]
    pub n_observed: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub y0a: Vec<f64>,
    pub y0b: Vec<f64>,
    pub horizon: f64,
    pub n_points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
}

fn all_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv]
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: None, formats: all_formats() }
    }
}

/// Overrides for the built-in example pipelines.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetConfig {
    pub b: Option<f64>,
    pub small_rate: Option<f64>,
    pub n_modes: Option<usize>,
    pub collocation_points: Option<usize>,
    pub q_scale: Option<f64>,
    pub q_decay: Option<f64>,
    pub zero_jumps: Option<bool>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Option<ModelConfig>,
    pub run: Option<RunConfig>,
    pub recurrence: Option<RecurrenceConfig>,
    pub stability: Option<StabilityConfig>,
    #[serde(default)]
    pub preset: PresetConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Config { path: String::new(), msg: e.to_string() })?;
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            msg: e.inner().message().to_string(),
        })?;
        if let Some(run) = &cfg.run {
            run.validate()?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn empty() -> Self {
        ExperimentConfig {
            model: None,
            run: None,
            recurrence: None,
            stability: None,
            preset: PresetConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn model(&self) -> Result<SdeModel> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::Config { path: "model".into(), msg: "missing section".into() })?
            .build()
    }

    pub fn run(&self) -> Result<&RunConfig> {
        self.run.as_ref().ok_or_else(|| Error::Config { path: "run".into(), msg: "missing section".into() })
    }
}
