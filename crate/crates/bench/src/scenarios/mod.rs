//! Named experiment scenarios. Each maps to at most one acceptance criterion.

use anyhow::Result;
use nastynoise::RngHandle;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::report::TrialReport;

mod amplify;
mod codes;
mod ice;
mod icesep;
mod reductions;
mod sep;

pub use amplify::BadAmplifyWorld;

pub struct Scenario {
    pub id: &'static str,
    /// Acceptance criterion scored by this scenario, 0 if none.
    pub criterion: u32,
    pub summary: &'static str,
    pub run: fn(&ExperimentConfig) -> Result<TrialReport>,
}

pub const SCENARIOS: &[Scenario] = &[
    Scenario { id: "ice-filter-unit", criterion: 0, summary: "ICE on random samples, one record per trial", run: ice::unit },
    Scenario { id: "ice-suite", criterion: 1, summary: "ICE invariants over every short sample on a small domain", run: ice::suite },
    Scenario { id: "nasty-budget-law", criterion: 2, summary: "realized nasty budgets against Bin(n, eta)", run: amplify::budget_law },
    Scenario { id: "amplify-concentration", criterion: 3, summary: "summed component error of Amplify under nasty noise", run: amplify::concentration },
    Scenario { id: "badamplify", criterion: 4, summary: "holdout selection versus mixing on the counterexample world", run: amplify::badamplify },
    Scenario { id: "codes-suite", criterion: 5, summary: "erasure and bit-flip decoding against brute-force oracles", run: codes::suite },
    Scenario { id: "sep-learner", criterion: 6, summary: "erasure-decoding learner against the key-erasure adversary", run: sep::learner },
    Scenario { id: "sep-adversary", criterion: 7, summary: "nasty key-flipping adversary and its value-side simulation", run: sep::adversary },
    Scenario { id: "round-lemma", criterion: 8, summary: "Hamming distance after randomized rounding", run: icesep::round_lemma },
    Scenario { id: "ice-coupling", criterion: 9, summary: "nasty noise replayed by a strong malicious adversary", run: icesep::coupling },
    Scenario { id: "ice-learner", criterion: 10, summary: "ICE learner end to end and the idealized adversary", run: icesep::learner },
    Scenario { id: "reduction-demos", criterion: 11, summary: "Huber as malicious, fixed-rate tracking standard nasty", run: reductions::demos },
];

pub fn find(id: &str) -> Option<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.id == id)
}

pub fn run_scenario(cfg: &ExperimentConfig) -> Result<TrialReport> {
    cfg.validate()?;
    let scenario = find(&cfg.scenario).expect("validated");
    let report = (scenario.run)(cfg)?;
    if let Some(dir) = &cfg.out {
        report.write(dir)?;
    }
    Ok(report)
}

/// Runs `trial(t, stream t)` for every trial in parallel, in trial order.
pub(crate) fn par_trials<T, F>(cfg: &ExperimentConfig, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, RngHandle) -> Result<T> + Sync,
{
    (0..cfg.trials).into_par_iter().map(|t| trial(t, RngHandle::new(cfg.seed, t as u64))).collect()
}

pub(crate) fn frac(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

pub(crate) fn b2f(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}
