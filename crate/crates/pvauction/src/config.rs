//! The run configuration file.
//!
//! One TOML file serves every subcommand; each reads its own table:
//!
//! ```toml
//! [world]        # synth; absent means the built-in twelve-auction preset
//! seed = 42
//! horizon_end = "2022-12"
//! ...
//!
//! [simulate]
//! marginal_rule = "award_in_full"   # or "curtail", "reject"
//!
//! [link]
//! tolerance = "0.005"               # ct/kWh
//!
//! [analysis]
//! small_threshold_kw = 2000
//! min_group_size = 2
//! trend_from_auction = 1
//! regression_auctions = [1, 12]
//! ranges = [[1, 8], [9, 12], [1, 12]]
//!
//! [validate]
//! bound = 0.1                       # ct/kWh
//! ```

use std::path::Path;

use anyhow::Context;
use pvauction_core::clearing::{ClearingConfig, MarginalBidRule};
use pvauction_core::linkage::{LinkageConfig, DEFAULT_TOLERANCE};
use pvauction_core::metrics::{MetricsConfig, DEFAULT_SMALL_THRESHOLD_KW};
use pvauction_core::stats::SuiteConfig;
use pvauction_core::synth::WorldConfig;
use pvauction_core::validation::DEFAULT_BOUND;
use pvauction_core::Price;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub world: Option<WorldConfig>,
    pub simulate: SimulateSettings,
    pub link: LinkSettings,
    pub analysis: AnalysisSettings,
    pub validate: ValidateSettings,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else { return Ok(RunConfig::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalRule {
    #[default]
    AwardInFull,
    Curtail,
    Reject,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSettings {
    pub marginal_rule: MarginalRule,
}

impl SimulateSettings {
    pub fn clearing(&self) -> ClearingConfig {
        let marginal = match self.marginal_rule {
            MarginalRule::AwardInFull => MarginalBidRule::AwardInFull,
            MarginalRule::Curtail => MarginalBidRule::Curtail,
            MarginalRule::Reject => MarginalBidRule::Reject,
        };
        ClearingConfig { marginal }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSettings {
    pub tolerance: Price,
}

impl Default for LinkSettings {
    fn default() -> Self {
        LinkSettings { tolerance: DEFAULT_TOLERANCE }
    }
}

impl LinkSettings {
    pub fn linkage(&self) -> LinkageConfig {
        LinkageConfig { tolerance: self.tolerance }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSettings {
    pub small_threshold_kw: f64,
    pub min_group_size: usize,
    pub trend_from_auction: u32,
    pub regression_auctions: Option<[u32; 2]>,
    /// Inclusive auction ranges for pooled aggregates.
    pub ranges: Vec<[u32; 2]>,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            small_threshold_kw: DEFAULT_SMALL_THRESHOLD_KW,
            min_group_size: 2,
            trend_from_auction: 1,
            regression_auctions: None,
            ranges: vec![[1, 8], [9, 12], [1, 12]],
        }
    }
}

impl AnalysisSettings {
    pub fn metrics(&self) -> MetricsConfig {
        MetricsConfig { small_threshold_kw: self.small_threshold_kw }
    }

    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            min_group_size: self.min_group_size,
            trend_from_auction: self.trend_from_auction,
            regression_auctions: self.regression_auctions.map(|[a, b]| (a, b)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSettings {
    pub bound: f64,
}

impl Default for ValidateSettings {
    fn default() -> Self {
        ValidateSettings { bound: DEFAULT_BOUND }
    }
}
