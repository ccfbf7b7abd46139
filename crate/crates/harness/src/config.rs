use std::path::{Path, PathBuf};

use lincmdp::envmodel::JOB_SCHEDULING_V1;
use lincmdp::{EnvConfig, HyperParams, LinearCmdpSpec, Real};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HyperPreset {
    /// Step sizes, mixing weight and bonus from the regret analysis.
    Theory,
    /// α = 0.1, β_b = K^{1/4}, β_w = β_b ln K.
    #[default]
    PaperFig1,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F64,
    F32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperConfig {
    #[serde(default)]
    pub preset: HyperPreset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing_period: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvConfig,
    pub episodes: usize,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub hyper: HyperConfig,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default = "default_parallel")]
    pub parallel: usize,
}

fn default_parallel() -> usize {
    1
}

impl ExperimentConfig {
    /// The job-scheduling experiment: K = 100000, seeds 1..=10, tuned preset.
    pub fn paper_fig1() -> Self {
        Self {
            environment: EnvConfig::Preset {
                preset: JOB_SCHEDULING_V1.into(),
            },
            episodes: 100_000,
            seeds: (1..=10).collect(),
            hyper: HyperConfig::default(),
            precision: Precision::F64,
            out: None,
            parallel: 1,
        }
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_owned(),
            source,
        })?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Structural checks that do not need the environment.
    pub fn check(&self) -> Result<(), HarnessError> {
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("seeds must be non-empty".into()));
        }
        if self.episodes == 0 {
            return Err(HarnessError::Config("episodes must be at least 1".into()));
        }
        if self.parallel == 0 {
            return Err(HarnessError::Config("parallel must be at least 1".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(HarnessError::Config("seeds must be distinct".into()));
        }
        Ok(())
    }

    pub fn build_spec<T: Real>(&self) -> Result<LinearCmdpSpec<T>, HarnessError> {
        Ok(self.environment.build(self.episodes)?)
    }

    /// Preset values with overrides applied, validated.
    pub fn hyper_params<T: Real>(&self, spec: &LinearCmdpSpec<T>) -> Result<HyperParams<T>, HarnessError> {
        let k = self.episodes;
        let h = spec.horizon();
        let cfg = &self.hyper;
        let delta = T::lit(cfg.delta.unwrap_or(DEFAULT_DELTA));
        let mut hp = match cfg.preset {
            HyperPreset::Theory => HyperParams::theory(k, h, spec.dim(), spec.num_actions(), delta),
            HyperPreset::PaperFig1 => HyperParams::tuned(k, h, delta),
        };
        let set = |slot: &mut T, v: Option<f64>| {
            if let Some(v) = v {
                *slot = T::lit(v);
            }
        };
        set(&mut hp.alpha, cfg.alpha);
        set(&mut hp.eta, cfg.eta);
        set(&mut hp.theta, cfg.theta);
        set(&mut hp.beta_b, cfg.beta_b);
        set(&mut hp.beta_w, cfg.beta_w);
        if let Some(p) = cfg.mixing_period {
            hp.mixing_period = p;
        }
        hp.validate()?;
        Ok(hp)
    }
}
