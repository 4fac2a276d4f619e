//! Experiment configuration files.
//!
//! A config is a JSON object:
//!
//! ```json
//! { "scenario": "nasty-budget-law", "trials": 2000, "seed": 7,
//!   "params": { "n": 100, "eta": 0.2 }, "out": "runs/budget" }
//! ```
//!
//! `params` is scenario-specific; unknown keys are rejected when the scenario
//! reads its parameters.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::scenarios;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_trials() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(scenario: &str, trials: usize, seed: u64) -> Result<Self> {
        let cfg = Self { scenario: scenario.to_owned(), params: BTreeMap::new(), trials, seed, out: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_owned(), value.into());
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("malformed config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if scenarios::find(&self.scenario).is_none() {
            bail!("unknown scenario {:?}", self.scenario);
        }
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        Ok(())
    }

    /// Typed view of `params` that remembers which keys were read.
    pub fn reader(&self) -> ParamReader<'_> {
        ParamReader { params: &self.params, used: Default::default() }
    }
}

pub struct ParamReader<'a> {
    params: &'a BTreeMap<String, Value>,
    used: std::cell::RefCell<Vec<String>>,
}

impl ParamReader<'_> {
    fn get(&self, key: &str) -> Option<&Value> {
        self.used.borrow_mut().push(key.to_owned());
        self.params.get(key)
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.as_f64().with_context(|| format!("parameter {key} must be a number")),
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|x| x as usize)
                .with_context(|| format!("parameter {key} must be a non-negative integer")),
        }
    }

    pub fn opt_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => Ok(Some(v.as_u64().with_context(|| format!("parameter {key} must be an integer"))? as usize)),
        }
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => Ok(Some(v.as_f64().with_context(|| format!("parameter {key} must be a number"))?)),
        }
    }

    pub fn string(&self, key: &str, default: &str) -> Result<String> {
        match self.get(key) {
            None => Ok(default.to_owned()),
            Some(v) => Ok(v.as_str().with_context(|| format!("parameter {key} must be a string"))?.to_owned()),
        }
    }

    /// Fails on keys no call has asked for.
    pub fn finish(self) -> Result<()> {
        let used = self.used.into_inner();
        if let Some(k) = self.params.keys().find(|k| !used.contains(k)) {
            bail!("unknown parameter {k:?}");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_reject() {
        let cfg = ExperimentConfig::parse(r#"{"scenario": "ice-filter-unit", "trials": 1, "seed": 3}"#).unwrap();
        assert_eq!(cfg.seed, 3);
        assert!(ExperimentConfig::parse(r#"{"scenario": "nope"}"#).is_err());
        assert!(ExperimentConfig::parse(r#"{"scenario": "ice-filter-unit", "trials": 0}"#).is_err());
        assert!(ExperimentConfig::parse(r#"{"scenario": "ice-filter-unit", "bogus": 1}"#).is_err());
    }

    #[test]
    fn reader_flags_unknown_params() {
        let cfg = ExperimentConfig::new("nasty-budget-law", 1, 0).unwrap().with("n", 5).with("typo", 1);
        let r = cfg.reader();
        assert_eq!(r.usize("n", 100).unwrap(), 5);
        assert!(r.finish().is_err());
    }
}
