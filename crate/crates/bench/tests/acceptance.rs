//! One line per acceptance criterion; exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nastynoise_bench::{run_scenario, ExperimentConfig};

struct Criterion {
    number: u32,
    scenario: &'static str,
    trials: usize,
    budget: Duration,
}

const SEED: u64 = 20_240_601;

const CRITERIA: &[Criterion] = &[
    Criterion { number: 1, scenario: "ice-suite", trials: 1, budget: Duration::from_secs(1) },
    Criterion { number: 2, scenario: "nasty-budget-law", trials: 2000, budget: Duration::from_secs(5) },
    Criterion { number: 3, scenario: "amplify-concentration", trials: 1000, budget: Duration::from_secs(60) },
    Criterion { number: 4, scenario: "badamplify", trials: 2000, budget: Duration::from_secs(120) },
    Criterion { number: 5, scenario: "codes-suite", trials: 50, budget: Duration::from_secs(60) },
    Criterion { number: 6, scenario: "sep-learner", trials: 200, budget: Duration::from_secs(300) },
    Criterion { number: 7, scenario: "sep-adversary", trials: 2000, budget: Duration::from_secs(120) },
    Criterion { number: 8, scenario: "round-lemma", trials: 200, budget: Duration::from_secs(5) },
    Criterion { number: 9, scenario: "ice-coupling", trials: 500, budget: Duration::from_secs(10) },
    Criterion { number: 10, scenario: "ice-learner", trials: 200, budget: Duration::from_secs(300) },
    Criterion { number: 11, scenario: "reduction-demos", trials: 2000, budget: Duration::from_secs(30) },
];

fn main() -> ExitCode {
    let mut failed = 0;
    for c in CRITERIA {
        let cfg = ExperimentConfig::new(c.scenario, c.trials, SEED).expect("known scenario");
        let start = Instant::now();
        let outcome = run_scenario(&cfg);
        let elapsed = start.elapsed();
        let timing = format!("{:.2} s of {} s", elapsed.as_secs_f64(), c.budget.as_secs());
        let (passed, line) = match outcome {
            Ok(report) => match report.verdicts.iter().find(|v| v.criterion == c.number) {
                Some(v) => (v.passed && elapsed <= c.budget, format!("{} ({}; {timing})", v.name, v.detail)),
                None => (false, format!("{} produced no verdict ({timing})", c.scenario)),
            },
            Err(e) => (false, format!("{} errored: {e:#} ({timing})", c.scenario)),
        };
        failed += usize::from(!passed);
        println!("[{}] criterion {}: {line}", if passed { "PASS" } else { "FAIL" }, c.number);
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
