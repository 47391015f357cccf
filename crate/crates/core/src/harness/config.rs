use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{argument, Error, Result};
use crate::initdata::PreparationOrder;
use crate::integrators::Scheme;
use crate::models::ModelId;
use crate::reference::ReferencePolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepScheme {
    Ua1,
    Ua2,
    Strang,
    Averaged,
}

impl SweepScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepScheme::Ua1 => "ua1",
            SweepScheme::Ua2 => "ua2",
            SweepScheme::Strang => "strang",
            SweepScheme::Averaged => "averaged",
        }
    }

    pub fn two_scale(self) -> Option<Scheme> {
        match self {
            SweepScheme::Ua1 => Some(Scheme::Ua1),
            SweepScheme::Ua2 => Some(Scheme::Ua2),
            _ => None,
        }
    }
}

impl fmt::Display for SweepScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ua1" => Ok(SweepScheme::Ua1),
            "ua2" => Ok(SweepScheme::Ua2),
            "strang" => Ok(SweepScheme::Strang),
            "averaged" => Ok(SweepScheme::Averaged),
            _ => Err(argument(format!("unknown scheme '{s}'"))),
        }
    }
}

fn default_norm() -> f64 {
    1.0
}

/// One (ε, Δt) error sweep. Step sizes are `Δt = 2^{-K} t_final`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: ModelId,
    pub scheme: SweepScheme,
    pub init_order: PreparationOrder,
    pub eps_list: Vec<f64>,
    pub k_list: Vec<u32>,
    pub t_final: f64,
    pub nx: usize,
    pub ntau: usize,
    #[serde(default = "default_norm")]
    pub norm_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub reference_policy: ReferencePolicy,
    /// Where references are cached; `.ua-cache` in the working directory
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

pub const PAPER_EPS: [f64; 6] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-6];

impl SweepConfig {
    /// Desk-scale defaults: the published ε grid, `K = 6..=12`, `T = 0.4`,
    /// and the test-run resolutions of each problem.
    pub fn paper(model: ModelId, scheme: SweepScheme, init_order: PreparationOrder) -> Self {
        let (nx, ntau) = match model {
            ModelId::Nkg => (200, 64),
            ModelId::Nls => (64, 2048),
        };
        SweepConfig {
            model,
            scheme,
            init_order,
            eps_list: PAPER_EPS.to_vec(),
            k_list: (6..=12).collect(),
            t_final: 0.4,
            nx,
            ntau,
            norm_s: 1.0,
            output: None,
            reference_policy: ReferencePolicy::Desk,
            cache_dir: None,
        }
    }

    /// The published grids: `K = 6..=18` with the paper's reference recipe.
    pub fn full(mut self) -> Self {
        self.k_list = (6..=18).collect();
        self.reference_policy = ReferencePolicy::Paper;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_list.is_empty() || self.k_list.is_empty() {
            return Err(argument("eps_list and k_list must be nonempty"));
        }
        if let Some(e) = self.eps_list.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return Err(argument(format!("epsilon {e} outside (0, 1]")));
        }
        if let Some(k) = self.k_list.iter().find(|k| **k > 30) {
            return Err(argument(format!("K = {k} is too large")));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(argument("t_final must be positive"));
        }
        if self.nx < 2 || self.ntau < 2 {
            return Err(argument("nx and ntau must be at least 2"));
        }
        if !(self.norm_s >= 0.0) {
            return Err(argument("norm_s must be nonnegative"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(".ua-cache"))
    }

    pub fn dt(&self, k: u32) -> f64 {
        self.t_final / (1u64 << k) as f64
    }
}
