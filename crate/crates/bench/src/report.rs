//! Trial reports: per-trial records as CSV, everything else as JSON.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// One trial's measurements.
pub type Record = BTreeMap<String, f64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// Acceptance criterion number, or 0 for a supplementary check.
    pub criterion: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub trials: usize,
    pub params: BTreeMap<String, Value>,
    #[serde(skip)]
    pub records: Vec<Record>,
    pub aggregates: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, usize>,
    pub verdicts: Vec<Verdict>,
}

impl TrialReport {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: cfg.scenario.clone(),
            seed: cfg.seed,
            trials: cfg.trials,
            params: cfg.params.clone(),
            records: Vec::new(),
            aggregates: BTreeMap::new(),
            flags: BTreeMap::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn aggregate(&mut self, key: &str, value: f64) {
        self.aggregates.insert(key.to_owned(), value);
    }

    pub fn flag(&mut self, key: &str, count: usize) {
        self.flags.insert(key.to_owned(), count);
    }

    pub fn verdict(&mut self, criterion: u32, name: &str, passed: bool, detail: String) {
        self.verdicts.push(Verdict { criterion, name: name.to_owned(), passed, detail });
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text).context("malformed report")?;
        anyhow::ensure!(
            report.schema_version == SCHEMA_VERSION,
            "report schema {} is not {SCHEMA_VERSION}",
            report.schema_version
        );
        Ok(report)
    }

    /// Records as CSV, one column per key in sorted order, `trial` first.
    pub fn to_csv(&self) -> Result<String> {
        let keys: BTreeSet<&str> = self.records.iter().flat_map(|r| r.keys().map(String::as_str)).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(std::iter::once("trial").chain(keys.iter().copied()))?;
        for (t, r) in self.records.iter().enumerate() {
            let row = std::iter::once(t.to_string())
                .chain(keys.iter().map(|k| r.get(*k).map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(row)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    /// Writes `<scenario>.json` and `<scenario>.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let json = dir.join(format!("{}.json", self.scenario));
        let csv = dir.join(format!("{}.csv", self.scenario));
        std::fs::write(&json, self.to_json()?)?;
        std::fs::write(&csv, self.to_csv()?)?;
        Ok((json, csv))
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario {} (seed {}, {} trials)", self.scenario, self.seed, self.trials);
        for (k, v) in &self.aggregates {
            let _ = writeln!(s, "  {k:<28} {v:.6}");
        }
        for (k, v) in &self.flags {
            let _ = writeln!(s, "  {k:<28} {v}");
        }
        for v in &self.verdicts {
            let tag = if v.passed { "PASS" } else { "FAIL" };
            let label = if v.criterion == 0 { "check".to_owned() } else { format!("criterion {}", v.criterion) };
            let _ = writeln!(s, "[{tag}] {label}: {} ({})", v.name, v.detail);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_csv() {
        let cfg = ExperimentConfig::new("ice-filter-unit", 2, 9).unwrap();
        let mut r = TrialReport::new(&cfg);
        r.records.push([("a".to_owned(), 1.0)].into());
        r.records.push([("a".to_owned(), 2.5), ("b".to_owned(), 0.0)].into());
        r.aggregate("mean", 1.75);
        r.verdict(1, "x", true, "ok".into());
        let back = TrialReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back.aggregates, r.aggregates);
        assert_eq!(back.verdicts, r.verdicts);
        assert_eq!(r.to_csv().unwrap(), "trial,a,b\n0,1,\n1,2.5,0\n");
        assert!(r.render().contains("[PASS] criterion 1: x"));
    }
}
