use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classify::{DEFAULT_LAMBDA, DEFAULT_RIDGE_FACTOR};
use crate::error::{Error, Result};
use crate::features::{ContinuousKeyList, SelectionParams, SmallClusters};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Camera brand attribution.
    Brand,
    /// Editing-tool identification on files not shared on social networks.
    Tool,
    /// Social-network attribution; unshared files form the "Other" class.
    Social,
    /// Pristine/edited detection on social-network files.
    ManipSocial,
    /// Pristine/edited detection on local files, one fold per device model.
    ManipLocal,
    /// Brand attribution of a device model kept out of training.
    BlindDevice,
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "brand" => Scenario::Brand,
            "tool" => Scenario::Tool,
            "social" => Scenario::Social,
            "manip-social" => Scenario::ManipSocial,
            "manip-local" => Scenario::ManipLocal,
            "blind-device" => Scenario::BlindDevice,
            _ => return Err(format!("unknown scenario {s:?}")),
        })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Brand => "brand",
            Scenario::Tool => "tool",
            Scenario::Social => "social",
            Scenario::ManipSocial => "manip-social",
            Scenario::ManipLocal => "manip-local",
            Scenario::BlindDevice => "blind-device",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierChoice {
    /// Tree for two classes, LDA + kNN otherwise.
    #[default]
    Auto,
    LdaKnn,
    Tree,
}

impl FromStr for ClassifierChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "auto" => ClassifierChoice::Auto,
            "lda-knn" => ClassifierChoice::LdaKnn,
            "tree" => ClassifierChoice::Tree,
            _ => return Err(format!("unknown classifier {s:?}")),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub alpha: usize,
    pub beta: usize,
    pub lambda: usize,
    pub seed: u64,
    pub classifier: ClassifierChoice,
    pub ridge_factor: f64,
    pub small_clusters: SmallClusters,
    pub continuous: ContinuousKeyList,
    /// Decision-region cells per side of the plot.
    pub grid_resolution: usize,
    /// Device model id for the blind-device scenario.
    pub holdout: Option<String>,
    /// Restricts manip-social to one network.
    pub social_network: Option<String>,
    /// Drops brands with a single device model from leave-one-model-out.
    pub discard_single_model_brands: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let selection = SelectionParams::default();
        ScenarioConfig {
            scenario: Scenario::Brand,
            alpha: selection.alpha,
            beta: selection.beta,
            lambda: DEFAULT_LAMBDA,
            seed: selection.seed,
            classifier: ClassifierChoice::Auto,
            ridge_factor: DEFAULT_RIDGE_FACTOR,
            small_clusters: selection.small_clusters,
            continuous: ContinuousKeyList::default(),
            grid_resolution: 120,
            holdout: None,
            social_network: None,
            discard_single_model_brands: true,
        }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| Error::Config {
        line,
        reason: format!("{key}: {e}"),
    })
}

impl ScenarioConfig {
    pub fn selection(&self) -> SelectionParams {
        SelectionParams {
            alpha: self.alpha,
            beta: self.beta,
            seed: self.seed,
            small_clusters: self.small_clusters,
        }
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or_default().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                reason: "expected key = value".into(),
            })?;
            self.set(line, key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Sets one option by name. `line` is only used in error messages.
    pub fn set(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        let optional = |v: &str| (!v.is_empty()).then(|| v.to_string());
        match key {
            "scenario" => self.scenario = parse_value(line, key, value)?,
            "alpha" => self.alpha = parse_value(line, key, value)?,
            "beta" => self.beta = parse_value(line, key, value)?,
            "lambda" => self.lambda = parse_value(line, key, value)?,
            "seed" => self.seed = parse_value(line, key, value)?,
            "classifier" => self.classifier = parse_value(line, key, value)?,
            "ridge_factor" => self.ridge_factor = parse_value(line, key, value)?,
            "grid_resolution" => self.grid_resolution = parse_value(line, key, value)?,
            "discard_single_model_brands" => {
                self.discard_single_model_brands = parse_value(line, key, value)?
            }
            "small_clusters" => {
                self.small_clusters = match value {
                    "keep" => SmallClusters::Keep,
                    "discard" => SmallClusters::Discard,
                    _ => {
                        return Err(Error::Config {
                            line,
                            reason: format!("small_clusters: expected keep or discard, got {value:?}"),
                        })
                    }
                }
            }
            "continuous_keys" => {
                self.continuous = ContinuousKeyList::new(
                    value.split(',').map(str::trim).filter(|k| !k.is_empty()),
                )
            }
            "holdout" => self.holdout = optional(value),
            "social_network" => self.social_network = optional(value),
            _ => {
                return Err(Error::Config {
                    line,
                    reason: format!("unknown key {key:?}"),
                })
            }
        }
        if self.lambda == 0 {
            return Err(Error::Config {
                line,
                reason: "lambda must be at least 1".into(),
            });
        }
        Ok(())
    }
}
