use std::process::Command;

use nastynoise_bench::{run_scenario, ExperimentConfig, TrialReport, SCENARIOS};

fn small(id: &str) -> ExperimentConfig {
    let cfg = ExperimentConfig::new(id, 3, 11).unwrap();
    match id {
        "sep-learner" => cfg.with("w", 12).with("k", 6).with("d", 8).with("u", 4).with("n", 4000),
        "sep-adversary" => cfg.with("w", 12).with("k", 6).with("d", 8).with("u", 4),
        "ice-learner" => cfg.with("n", 4000),
        "codes-suite" => cfg.with("w", 8),
        _ => cfg,
    }
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for s in SCENARIOS {
        let mut a = small(s.id);
        a.out = Some(dir.path().join("a"));
        let mut b = a.clone();
        b.out = Some(dir.path().join("b"));
        run_scenario(&a).unwrap();
        run_scenario(&b).unwrap();
        for ext in ["json", "csv"] {
            let name = format!("{}.{ext}", s.id);
            let x = std::fs::read(dir.path().join("a").join(&name)).unwrap();
            let y = std::fs::read(dir.path().join("b").join(&name)).unwrap();
            assert_eq!(x, y, "{name} differs between identical runs");
        }
    }
}

#[test]
fn single_trial_unit_report() {
    let report = run_scenario(&ExperimentConfig::new("ice-filter-unit", 1, 0).unwrap()).unwrap();
    assert_eq!(report.records.len(), 1);
    assert!(report.passed());
}

#[test]
fn reports_are_self_contained() {
    let report = run_scenario(&small("nasty-budget-law")).unwrap();
    let back = TrialReport::from_json(&report.to_json().unwrap()).unwrap();
    assert_eq!(back.verdicts, report.verdicts);
    assert_eq!(back.params, report.params);
}

#[test]
fn config_errors() {
    assert!(ExperimentConfig::parse(r#"{"scenario": "nope"}"#).is_err());
    assert!(ExperimentConfig::parse(r#"{"scenario": "ice-suite", "trials": 0}"#).is_err());
    let cfg = ExperimentConfig::new("badamplify", 2, 0).unwrap().with("eta", 0.6);
    assert!(run_scenario(&cfg).is_err());
}

#[test]
fn zero_rate_reductions_do_not_move() {
    let cfg = ExperimentConfig::new("reduction-demos", 20, 5).unwrap().with("eta", 0.0);
    let report = run_scenario(&cfg).unwrap();
    assert_eq!(report.aggregates["mean_positional_difference"], 0.0);
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_nastynoise")).args(args).output().unwrap()
}

#[test]
fn cli_run_writes_and_renders() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = cli(&["run", "round-lemma", "--seed", "3", "--trials", "20", "--out", out, "-p", "w=100"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.contains("[PASS] criterion 8"));
    let json = dir.path().join("round-lemma.json");
    let csv = std::fs::read_to_string(dir.path().join("round-lemma.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
    let rendered = cli(&["report", "render", json.to_str().unwrap()]);
    assert_eq!(String::from_utf8(rendered.stdout).unwrap(), stdout);
}

#[test]
fn cli_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"scenario": "nasty-budget-law", "trials": 50, "seed": 2, "params": {"n": 40}}"#).unwrap();
    let run = cli(&["run", "--config", path.to_str().unwrap()]);
    assert!(String::from_utf8(run.stdout).unwrap().contains("nasty-budget-law (seed 2, 50 trials)"));
    let bad = cli(&["run", "ice-suite", "-p", "colour=3"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn cli_codes_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.hex");
    let gen = cli(&["codes", "gen", "--k", "3", "--w", "8", "--seed", "4", "--out", path.to_str().unwrap()]);
    assert!(gen.status.success());
    let g: nastynoise::codes::GeneratorMatrix = std::fs::read_to_string(&path).unwrap().parse().unwrap();
    let word = g.encode(5).unwrap().to_string();
    let decoded = cli(&["codes", "decode", "--code", path.to_str().unwrap(), &word]);
    let text = String::from_utf8(decoded.stdout).unwrap();
    assert_eq!(text.trim(), format!("5 {word}"));
    let erased: String = word.chars().enumerate().map(|(i, c)| if i < 2 { '?' } else { c }).collect();
    let listed = cli(&["codes", "decode", "--code", path.to_str().unwrap(), &erased]);
    assert!(String::from_utf8(listed.stdout).unwrap().lines().any(|l| l == format!("5 {word}")));
    let flipped = cli(&["codes", "decode", "--code", path.to_str().unwrap(), "--radius", "0", &word]);
    assert_eq!(String::from_utf8(flipped.stdout).unwrap().trim(), format!("5 {word}"));
}
