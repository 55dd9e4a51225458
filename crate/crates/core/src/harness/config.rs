//! JSON experiment configuration.

use serde::{Deserialize, Serialize};

use crate::error::{FracError, FracResult};
use crate::functions::DEFAULT_TRUNCATION;
use crate::geometry::{IfsSpec, DEFAULT_POINT_BUDGET};

/// A set given by preset name or by explicit parameters.
///
/// Explicit parameters are validated only when a row is built, so one bad
/// entry fails its own rows and nothing else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetInput {
    /// `interval`, `square`, `cantor`, `carpet` or `two-ended-<q>` for ratio `1/q`.
    Named(String),
    Explicit {
        n: usize,
        #[serde(default)]
        m: Option<usize>,
        r: f64,
        translations: Vec<Vec<f64>>,
    },
}

impl SetInput {
    pub fn build(&self) -> FracResult<IfsSpec> {
        match self {
            SetInput::Named(name) => match name.as_str() {
                "interval" => Ok(IfsSpec::unit_interval()),
                "square" => Ok(IfsSpec::unit_square()),
                "cantor" => Ok(IfsSpec::cantor()),
                "carpet" => Ok(IfsSpec::carpet()),
                other => {
                    let q = other
                        .strip_prefix("two-ended-")
                        .and_then(|q| q.parse::<f64>().ok())
                        .ok_or_else(|| FracError::InvalidSpec(format!("unknown set `{other}`")))?;
                    IfsSpec::two_ended(1.0 / q)
                }
            },
            SetInput::Explicit { n, m, r, translations } => {
                let spec = IfsSpec::new(*n, *r, translations.clone())?;
                match m {
                    Some(m) if *m != spec.branch_count() => Err(FracError::InvalidSpec(format!(
                        "m = {m} but {} translations given",
                        spec.branch_count()
                    ))),
                    _ => Ok(spec),
                }
            }
        }
    }
}

impl From<&IfsSpec> for SetInput {
    fn from(spec: &IfsSpec) -> Self {
        SetInput::Explicit {
            n: spec.ambient_dim(),
            m: Some(spec.branch_count()),
            r: spec.ratio(),
            translations: spec.translations().to_vec(),
        }
    }
}

/// One set of the sweep with its sampling depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetEntry {
    pub set: SetInput,
    /// Attractor generation level.
    pub level: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionKind {
    Weierstrass,
    BesovSynth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Estimators {
    pub boxdim: bool,
    pub corrdim: bool,
    pub premeasure: bool,
}

impl Default for Estimators {
    fn default() -> Self {
        Estimators { boxdim: true, corrdim: false, premeasure: false }
    }
}

/// A sweep over sets × smoothness values × seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sets: Vec<SetEntry>,
    #[serde(default = "default_kind")]
    pub function_kind: FunctionKind,
    pub s_values: Vec<f64>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Weierstrass terms kept.
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    /// Wavelet levels synthesized for `besov-synth`.
    #[serde(default = "default_besov_levels")]
    pub besov_levels: u32,
    pub seeds: Vec<u64>,
    /// Fixed graph fit range; adaptive when absent.
    #[serde(default)]
    pub j_range: Option<(u32, u32)>,
    #[serde(default)]
    pub estimators: Estimators,
    /// Sampled pairs per correlation curve.
    #[serde(default = "default_pairs")]
    pub corr_pairs: usize,
    /// Largest point count a single row may generate.
    #[serde(default = "default_budget")]
    pub point_budget: usize,
}

fn default_kind() -> FunctionKind {
    FunctionKind::Weierstrass
}
fn default_rho() -> f64 {
    2.0
}
fn default_truncation() -> usize {
    DEFAULT_TRUNCATION
}
fn default_besov_levels() -> u32 {
    12
}
fn default_pairs() -> usize {
    100_000
}
fn default_budget() -> usize {
    DEFAULT_POINT_BUDGET
}

impl ExperimentConfig {
    /// Weierstrass sweep with default settings.
    pub fn new(sets: Vec<SetEntry>, s_values: Vec<f64>, seeds: Vec<u64>) -> Self {
        ExperimentConfig {
            sets,
            function_kind: default_kind(),
            s_values,
            rho: default_rho(),
            truncation: default_truncation(),
            besov_levels: default_besov_levels(),
            seeds,
            j_range: None,
            estimators: Estimators::default(),
            corr_pairs: default_pairs(),
            point_budget: default_budget(),
        }
    }

    pub fn from_json(text: &str) -> FracResult<Self> {
        serde_json::from_str(text).map_err(|e| FracError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn row_count(&self) -> usize {
        self.sets.len() * self.s_values.len() * self.seeds.len()
    }
}
