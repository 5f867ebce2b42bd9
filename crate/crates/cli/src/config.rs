use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lcslab_core::index::IndexData;
use lcslab_core::linearization::LinearizeCheckOptions;
use lcslab_core::solver::{ClassifyOptions, SolveOptions};
use lcslab_core::{DomainSpec, ModelKind};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Which axis orbit a command works with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitChoice {
    #[default]
    Short,
    Long,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub orbit: OrbitChoice,
    /// Orbit winding of the explicit family along `t`.
    pub k: i64,
    /// Charge of the explicit family.
    pub nu: i64,
    /// Random points for `verify-frames`.
    pub points: usize,
    /// Perturbed seeds for `orbits`.
    pub orbit_seeds: usize,
    /// Rotation path `2 pi theta` for `cz`; the linearized orbit path otherwise.
    pub theta: Option<f64>,
    /// Cover of the orbit used by `cz`.
    pub iterate: usize,
    pub sobolev_p: f64,
    pub n_s: usize,
    pub t_max: f64,
    pub random_seeds: usize,
    pub index: Option<IndexData>,
    /// `alpha = harmonic + d(bump_amplitude * bump)` for `decompose`;
    /// `harmonic` holds the `dtau` and `dt` coefficients.
    pub harmonic: [f64; 2],
    pub bump_amplitude: f64,
    pub actions_plus: Vec<f64>,
    pub actions_minus: Vec<f64>,
    pub amplitude: f64,
    pub solve: SolveOptions,
    pub classify: ClassifyOptions,
    pub linearize: LinearizeCheckOptions,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            orbit: OrbitChoice::Short,
            k: 0,
            nu: 1,
            points: 1000,
            orbit_seeds: 5,
            theta: None,
            iterate: 1,
            sobolev_p: 4.0,
            n_s: 128,
            t_max: 5.0,
            random_seeds: 4,
            index: None,
            harmonic: [0.0, 1.0],
            bump_amplitude: 1.0,
            actions_plus: Vec::new(),
            actions_minus: Vec::new(),
            amplitude: 0.05,
            solve: SolveOptions::default(),
            classify: ClassifyOptions::default(),
            linearize: LinearizeCheckOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "default_model")]
    pub model: ModelKind,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub params: Params,
    /// Overrides of check tolerances by check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_model() -> ModelKind {
    ModelKind::RoundS3
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).context("config does not match the schema")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!("schema_version must be {SCHEMA_VERSION}, got {}", self.schema_version);
        }
        for (name, v) in &self.tolerances {
            if !(v.is_finite() && *v >= 0.0) {
                bail!("tolerance {name} must be a nonnegative number, got {v}");
            }
        }
        let p = &self.params;
        if p.iterate == 0 {
            bail!("params.iterate must be at least 1");
        }
        if !(p.amplitude >= 0.0) {
            bail!("params.amplitude must be nonnegative");
        }
        p.solve.validate()?;
        if let Some(d) = &self.params.index {
            d.validate()?;
        }
        Ok(())
    }
}
