use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use nastynoise::codes::{bitflip_list_decode, erasure_list_decode, gen_random_code, Codeword, GeneratorMatrix, ReceivedWord};
use nastynoise::RngHandle;
use nastynoise_bench::{run_scenario, ExperimentConfig, TrialReport, SCENARIOS};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "nastynoise", version, about = "Experiments on learning with malicious and nasty noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and print its report.
    Run {
        /// Scenario id; optional when --config names one.
        scenario: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// JSON experiment config.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for `<scenario>.json` and `<scenario>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Scenario parameter override, `key=value`; repeatable.
        #[arg(long = "param", short = 'p')]
        params: Vec<String>,
    },
    /// List scenario ids and the criterion each one scores.
    ListScenarios,
    /// Generator matrices and list decoding.
    Codes {
        #[command(subcommand)]
        command: CodesCommand,
    },
    /// Reports written by `run --out`.
    Report {
        #[command(subcommand)]
        command: ReportCommand,
    },
}

#[derive(Subcommand)]
enum CodesCommand {
    /// Print a random full-rank generator matrix as hex text.
    Gen {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        w: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List-decode a word over `+`, `-` and `?`.
    Decode {
        /// Generator matrix in hex text.
        #[arg(long)]
        code: PathBuf,
        /// Received word; `?` marks an erasure.
        #[arg(allow_hyphen_values = true)]
        word: String,
        /// Decode bit flips within this Hamming radius instead of erasures.
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long, default_value_t = 1024)]
        cap: usize,
    },
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Print a JSON report in readable form.
    Render { path: PathBuf },
}

fn parse_param(s: &str) -> Result<(String, Value)> {
    let (k, v) = s.split_once('=').with_context(|| format!("parameter {s:?} is not key=value"))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_owned()));
    Ok((k.trim().to_owned(), value))
}

fn run(
    scenario: Option<String>,
    seed: Option<u64>,
    trials: Option<usize>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    params: Vec<String>,
) -> Result<TrialReport> {
    let mut cfg = match (&config, &scenario) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(id)) => ExperimentConfig::new(id, 1, 0)?,
        (None, None) => bail!("name a scenario or pass --config"),
    };
    if let Some(id) = scenario {
        cfg.scenario = id;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(trials) = trials {
        cfg.trials = trials;
    }
    if out.is_some() {
        cfg.out = out;
    }
    for p in &params {
        let (k, v) = parse_param(p)?;
        cfg.params.insert(k, v);
    }
    run_scenario(&cfg)
}

fn codes(command: CodesCommand) -> Result<()> {
    match command {
        CodesCommand::Gen { k, w, seed, out } => {
            let g = gen_random_code(k, w, &mut RngHandle::from_seed(seed).rng())?;
            match out {
                Some(path) => std::fs::write(&path, g.to_hex_text()).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{g}"),
            }
        }
        CodesCommand::Decode { code, word, radius, cap } => {
            let text = std::fs::read_to_string(&code).with_context(|| format!("reading {}", code.display()))?;
            let g: GeneratorMatrix = text.parse()?;
            let r: ReceivedWord = word.parse()?;
            let messages = match radius {
                Some(radius) => {
                    if r.erasures() > 0 {
                        bail!("bit-flip decoding takes a word without erasures");
                    }
                    bitflip_list_decode(&g, &Codeword { bits: r.bits, width: r.width }, radius, cap)?
                }
                None => erasure_list_decode(&g, &r, cap)?,
            };
            for m in messages {
                println!("{m:0width$x} {}", g.encode(m)?, width = g.message_bits().div_ceil(4));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, seed, trials, config, out, params } => {
            run(scenario, seed, trials, config, out, params).map(|report| {
                print!("{}", report.render());
                report.passed()
            })
        }
        Command::ListScenarios => {
            for s in SCENARIOS {
                let criterion = if s.criterion == 0 { "-".to_owned() } else { s.criterion.to_string() };
                println!("{:<24} {:>2}  {}", s.id, criterion, s.summary);
            }
            Ok(true)
        }
        Command::Codes { command } => codes(command).map(|()| true),
        Command::Report { command: ReportCommand::Render { path } } => std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))
            .and_then(|text| TrialReport::from_json(&text))
            .map(|report| {
                print!("{}", report.render());
                true
            }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
