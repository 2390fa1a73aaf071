//! Run configuration: a TOML file, overridden field by field by flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use ucmarket_core::learning::SimConfig;
use ucmarket_core::market_data::{illustrative_case, load_case, IllustrativeScenario, MarketCase};
use ucmarket_core::pricing::PricingModel;
use ucmarket_core::Error;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Case file; relative paths resolve against the config file.
    pub case: Option<PathBuf>,
    /// Built-in illustrative scenario, used when `case` is absent.
    pub scenario: Option<String>,
    #[serde(default)]
    pub models: Vec<PricingModel>,
    pub out: Option<PathBuf>,
    /// Trailing iterations used for strategic-bidding rates.
    pub final_window: Option<usize>,
    #[serde(default)]
    pub sim: SimConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
        if let (Some(case), Some(dir)) = (&config.case, path.parent()) {
            if case.is_relative() {
                config.case = Some(dir.join(case));
            }
        }
        Ok(config)
    }

    pub fn models(&self) -> Vec<PricingModel> {
        if self.models.is_empty() {
            PricingModel::ALL.to_vec()
        } else {
            self.models.clone()
        }
    }

    pub fn final_window(&self) -> usize {
        self.final_window.unwrap_or_else(|| self.sim.iterations.div_ceil(2))
    }

    /// Load the case and a label for it in the manifest.
    pub fn resolve_case(&self) -> Result<(MarketCase, String), Error> {
        match (&self.case, &self.scenario) {
            (Some(path), _) => Ok((load_case(path)?, path.display().to_string())),
            (None, Some(name)) => {
                let scenario: IllustrativeScenario = name.parse().map_err(Error::Config)?;
                Ok((illustrative_case(scenario), format!("builtin:{}", scenario.name())))
            }
            (None, None) => Err(Error::Config("no case given (set `case` or `scenario`, or pass --case)".into())),
        }
    }
}
