use anyhow::{ensure, Result};
use nastynoise::noise::{
    fixed_rate_nasty_corrupt, huber_marginal, malicious_marginal_oblivious, nasty_corrupt, tv_distance_weights,
    Corruption, NastyStrategy, NoiseRate, OutlierDraw, StrategyOutcome, TrackStandard,
};
use nastynoise::{draw_clean_sample, DiscreteDistribution, Label, Sample, SimRng, TableConcept};
use rand::Rng;

use super::{b2f, par_trials};
use crate::config::ExperimentConfig;
use crate::report::{Record, TrialReport};
use crate::strategies;

/// Replays recorded corruptions, truncated to the budget.
struct Replay(Vec<Corruption>);

impl NastyStrategy for Replay {
    fn corrupt(&self, _: &Sample, budget: usize, _: &mut SimRng) -> StrategyOutcome {
        StrategyOutcome::new(self.0.iter().take(budget).copied().collect())
    }
}

fn random_distribution(size: usize, rng: &mut SimRng) -> nastynoise::Result<DiscreteDistribution> {
    DiscreteDistribution::normalized((0..size).map(|_| rng.gen::<f64>() + 1e-3).collect())
}

pub fn demos(cfg: &ExperimentConfig) -> Result<TrialReport> {
    let p = cfg.reader();
    let points = p.usize("points", 8)?;
    let m = p.usize("m", 400)?;
    let eta = p.f64("eta", 0.1)?;
    let strategy = strategies::nasty(&p.string("strategy", "flip-random")?, points)?;
    p.finish()?;
    ensure!((1..=64).contains(&points), "exact comparison needs at most 64 points");
    let eta = NoiseRate::new(eta)?;
    let bound = (m as f64).sqrt() + 1.0;

    let records = par_trials(cfg, |_, h| {
        let mut rng = h.rng();
        let d = random_distribution(points, &mut rng)?;
        let c = TableConcept::new((0..points).map(|_| Label::from_bit(rng.gen())).collect());
        let dc = DiscreteDistribution::clean_labeled(&d, &c)?;
        let adversary = OutlierDraw { outliers: random_distribution(2 * points, &mut rng)? };
        let huber_eta = NoiseRate::new(rng.gen_range(0.0..0.5))?;
        let huber = huber_marginal(&dc, huber_eta, &adversary.outliers)?;
        let malicious = malicious_marginal_oblivious(&dc, huber_eta, adversary.choice_law())?;
        let tv = tv_distance_weights(&huber, &malicious)?;

        let clean = draw_clean_sample(&d, &c, m, &mut rng)?;
        let (standard, std_ledger) = nasty_corrupt(&clean, eta, strategy.as_ref(), &mut rng)?;
        let replay = Replay(
            std_ledger
                .corrupted_indices
                .iter()
                .zip(&std_ledger.introduced)
                .map(|(&index, &replacement)| Corruption { index, replacement })
                .collect(),
        );
        let tracker = TrackStandard { standard: &replay, standard_budget: std_ledger.budget };
        let (fixed, fixed_ledger) = fixed_rate_nasty_corrupt(&clean, eta, &tracker, &mut rng)?;
        let moved = std_ledger
            .corrupted_indices
            .iter()
            .filter(|i| !fixed_ledger.is_corrupted(**i))
            .count()
            + fixed_ledger.corrupted_indices.iter().filter(|i| !std_ledger.is_corrupted(**i)).count();
        let differing = (0..m).filter(|&i| standard[i] != fixed[i]).count();

        let mut r = Record::new();
        r.insert("huber_tv".into(), tv);
        r.insert("standard_budget".into(), std_ledger.budget as f64);
        r.insert("fixed_budget".into(), fixed_ledger.budget as f64);
        r.insert("positional_difference".into(), moved as f64);
        r.insert("differing_examples".into(), differing as f64);
        r.insert("shared_agree".into(), b2f(shared_agree(&std_ledger, &fixed_ledger)));
        Ok(r)
    })?;

    let t = records.len() as f64;
    let max_tv = records.iter().map(|r| r["huber_tv"]).fold(0.0, f64::max);
    let mean_diff = records.iter().map(|r| r["positional_difference"]).sum::<f64>() / t;
    let shared = records.iter().all(|r| r["shared_agree"] == 1.0);
    let mut report = TrialReport::new(cfg);
    report.aggregate("max_huber_tv", max_tv);
    report.aggregate("mean_positional_difference", mean_diff);
    report.aggregate("positional_bound", bound);
    report.aggregate("mean_differing_examples", records.iter().map(|r| r["differing_examples"]).sum::<f64>() / t);
    report.verdict(
        11,
        "Huber realized as malicious; fixed-rate tracks standard nasty",
        max_tv <= 1e-12 && mean_diff <= bound && shared,
        format!(
            "max marginal TV {max_tv:.3e}; mean positional difference {mean_diff:.3} <= {bound:.1}; shared corruptions identical: {shared}"
        ),
    );
    report.records = records;
    Ok(report)
}

/// Positions corrupted by both adversaries received the same replacement.
fn shared_agree(a: &nastynoise::noise::CorruptionLedger, b: &nastynoise::noise::CorruptionLedger) -> bool {
    a.corrupted_indices.iter().zip(&a.introduced).all(|(i, e)| match b.corrupted_indices.binary_search(i) {
        Ok(j) => b.introduced[j] == *e,
        Err(_) => true,
    })
}
