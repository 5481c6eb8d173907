//! Run configuration, read from TOML. Every field has a default so a config
//! file only needs what it changes.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluate::{LogisticRegression, SplitSpec, TsneConfig};
use crate::generate::{DownsampleMode, NodeStrategy, ValuePolicy};
use crate::graphs::DEFAULT_SIMILAR_VALUE_EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Nvg,
    Hvg,
    Nvmg,
    Vrp,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Nvg, Method::Hvg, Method::Nvmg, Method::Vrp];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Nvg => "nvg",
            Method::Hvg => "hvg",
            Method::Nvmg => "nvmg",
            Method::Vrp => "vrp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown method {s:?}; valid methods: nvg, hvg, nvmg, vrp"
                ))
            })
    }
}

/// Parses a comma-separated method list.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let mut out: Vec<Method> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkSettings {
    pub node_strategy: NodeStrategy,
    pub value_policy: ValuePolicy,
    /// Defaults to the window length.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_length: Option<usize>,
}

impl Default for WalkSettings {
    fn default() -> Self {
        Self {
            node_strategy: NodeStrategy::default(),
            value_policy: ValuePolicy::RoundRobin,
            target_length: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DownsampleSettings {
    pub mode: DownsampleMode,
    pub k: usize,
}

impl Default for DownsampleSettings {
    fn default() -> Self {
        Self {
            mode: DownsampleMode::Ds,
            k: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluationSettings {
    pub split: SplitSpec,
    pub classifier: LogisticRegression,
    pub embedding: TsneConfig,
    /// Points drawn per origin for the embedding diagnostic.
    pub embed_per_origin: usize,
    pub mixing_k: usize,
}

impl Default for EvaluationSettings {
    fn default() -> Self {
        Self {
            split: SplitSpec::default(),
            classifier: LogisticRegression::default(),
            embedding: TsneConfig::default(),
            embed_per_origin: 250,
            mixing_k: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub input: PathBuf,
    pub window: usize,
    /// Defaults to the window length (non-overlapping windows).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    pub methods: Vec<Method>,
    pub walk: WalkSettings,
    pub sequences_per_window: usize,
    pub downsample: DownsampleSettings,
    pub similar_value_epsilon: f64,
    /// Write scaled-space values instead of prices (diagnostics).
    pub emit_scaled: bool,
    pub evaluation: EvaluationSettings,
    pub seed: u64,
    /// 0 = one per CPU.
    pub workers: usize,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::from("prices.csv"),
            window: 20,
            stride: None,
            methods: Method::ALL.to_vec(),
            walk: WalkSettings::default(),
            sequences_per_window: 10,
            downsample: DownsampleSettings::default(),
            similar_value_epsilon: DEFAULT_SIMILAR_VALUE_EPSILON,
            emit_scaled: false,
            evaluation: EvaluationSettings::default(),
            seed: 42,
            workers: 0,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Toml(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingFile(path.to_path_buf())
            } else {
                Error::io(path, e)
            }
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Toml(e.to_string()))
    }

    pub fn stride(&self) -> usize {
        self.stride.unwrap_or(self.window)
    }

    pub fn target_length(&self) -> usize {
        self.walk.target_length.unwrap_or(self.window)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.window < 3 {
            return bad(format!("window must be >= 3, got {}", self.window));
        }
        if self.stride() == 0 {
            return bad("stride must be >= 1".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        if self.sequences_per_window == 0 {
            return bad("sequences_per_window must be >= 1".into());
        }
        if self.downsample.k == 0 {
            return bad("downsample.k must be >= 1".into());
        }
        if self.target_length() < 3 {
            return bad("walk.target_length must be >= 3 for evaluation".into());
        }
        if self.similar_value_epsilon.is_nan() || self.similar_value_epsilon < 0.0 {
            return bad(format!("similar_value_epsilon {} < 0", self.similar_value_epsilon));
        }
        self.walk.node_strategy.validate()?;
        self.evaluation.split.validate()?;
        if self.evaluation.mixing_k == 0 {
            return bad("evaluation.mixing_k must be >= 1".into());
        }
        Ok(())
    }
}
