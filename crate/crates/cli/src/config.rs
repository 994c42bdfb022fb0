//! Suite configuration, as read from `run --config` or assembled from flags.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Sauer,
    EqualSplit,
    Half,
    Census,
    Regular,
    ToeplitzBuild,
    ToeplitzIndep,
    ToeplitzEval,
    NotIe,
    Sum,
    BanachChain,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Sauer,
        Suite::EqualSplit,
        Suite::Half,
        Suite::Census,
        Suite::Regular,
        Suite::ToeplitzBuild,
        Suite::ToeplitzIndep,
        Suite::ToeplitzEval,
        Suite::NotIe,
        Suite::Sum,
        Suite::BanachChain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Sauer => "sauer",
            Suite::EqualSplit => "equal-split",
            Suite::Half => "half",
            Suite::Census => "census",
            Suite::Regular => "regular",
            Suite::ToeplitzBuild => "toeplitz-build",
            Suite::ToeplitzIndep => "toeplitz-indep",
            Suite::ToeplitzEval => "toeplitz-eval",
            Suite::NotIe => "not-ie",
            Suite::Sum => "sum",
            Suite::BanachChain => "banach-chain",
        }
    }

    /// Whether the suite draws random instances.
    pub fn randomized(self) -> bool {
        matches!(self, Suite::Sauer | Suite::Half | Suite::Sum | Suite::BanachChain)
    }
}

/// Optional knobs; each suite reads the ones it understands and ignores the rest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExactnessCaps {
    /// Largest number of objects an exhaustive loop may visit.
    #[serde(default = "default_enumeration")]
    pub enumeration: u64,
}

fn default_enumeration() -> u64 {
    10_000_000
}

impl Default for ExactnessCaps {
    fn default() -> Self {
        Self { enumeration: default_enumeration() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SuiteConfig {
    pub suite: Suite,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub exactness_caps: ExactnessCaps,
    /// Directory receiving `<suite>.json` and any side artifacts.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

impl SuiteConfig {
    pub fn new(suite: Suite) -> Self {
        Self { suite, params: Params::default(), seed: None, exactness_caps: ExactnessCaps::default(), out: None, csv: None }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.suite.randomized() && self.params.trials != Some(0) && self.seed.is_none() {
            return Err(format!("suite {} draws random trials and needs a seed", self.suite.name()));
        }
        if self.exactness_caps.enumeration == 0 {
            return Err("enumeration cap must be positive".into());
        }
        if let Some([lo, hi]) = self.params.range {
            if lo > hi {
                return Err(format!("empty range {lo}..{hi}"));
            }
        }
        Ok(())
    }
}

/// A config file holds either one suite or `{"suites": [...]}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ConfigFile {
    Many { suites: Vec<SuiteConfig> },
    One(Box<SuiteConfig>),
}

impl ConfigFile {
    pub fn into_suites(self) -> Vec<SuiteConfig> {
        match self {
            ConfigFile::Many { suites } => suites,
            ConfigFile::One(s) => vec![*s],
        }
    }
}
