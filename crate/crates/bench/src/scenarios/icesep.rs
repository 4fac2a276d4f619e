use anyhow::Result;
use nastynoise::icesep::{
    idealized_need, idealized_survivors_match, l1_distance, nasty_via_strong_malicious, round_vector,
    IceFamily, IceIdealizedAdversary, IceLearner, IceSepParams, KeyBlockFlipAdversary, NastyViaStrongMalicious,
};
use nastynoise::learn::ice_filter;
use nastynoise::noise::{
    nasty_corrupt, strong_malicious_corrupt, FlipEligible, FlipRandom, NastyStrategy, NoiseRate, RandomReplace,
    StrongMaliciousStrategy,
};
use nastynoise::{draw_clean_sample, DiscreteDistribution, DomainPoint, Error, Label, LabeledExample, Sample};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{b2f, frac, par_trials};
use crate::config::ExperimentConfig;
use crate::report::{Record, TrialReport};

pub fn round_lemma(cfg: &ExperimentConfig) -> Result<TrialReport> {
    let p = cfg.reader();
    let w = p.usize("w", 200)?;
    let kappa = p.f64("kappa", 0.6)?;
    p.finish()?;
    anyhow::ensure!(w > 0 && (0.0..=1.0).contains(&kappa), "need w > 0 and kappa in [0, 1]");
    let budget = (1.0 - kappa) * w as f64;
    let bound = 0.5 * (1.0 - kappa / 2.0) * w as f64;
    let records = par_trials(cfg, |t, h| {
        let mut rng = h.rng();
        let u: Vec<Label> = (0..w).map(|_| Label::from_bit(rng.gen())).collect();
        // Three shapes of deviation with total L1 mass `budget`: spread over
        // every coordinate, concentrated as full flips, or half and half.
        let mut dev = vec![0.0; w];
        let spread = match t % 3 {
            0 => budget,
            1 => 0.0,
            _ => budget / 2.0,
        };
        let weights: Vec<f64> = (0..w).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = weights.iter().sum();
        for (d, x) in dev.iter_mut().zip(&weights) {
            *d = (spread * x / total).min(2.0);
        }
        let mut order: Vec<usize> = (0..w).collect();
        order.shuffle(&mut rng);
        let mut left = budget - dev.iter().sum::<f64>();
        for &i in &order {
            if left <= 0.0 {
                break;
            }
            let add = (2.0 - dev[i]).min(left);
            dev[i] += add;
            left -= add;
        }
        let v: Vec<f64> = u.iter().zip(&dev).map(|(l, d)| l.sign() as f64 * (1.0 - d)).collect();
        let l1: f64 = v.iter().zip(&u).map(|(vi, l)| (vi - l.sign() as f64).abs()).sum();
        let z = round_vector(&v, &mut rng);
        let ham = z.iter().zip(&u).filter(|(a, b)| a != b).count();
        let mut r = Record::new();
        r.insert("l1".into(), l1);
        r.insert("ham".into(), ham as f64);
        r.insert("holds".into(), b2f(ham as f64 <= bound));
        Ok(r)
    })?;
    let holds = records.iter().filter(|r| r["holds"] == 1.0).count();
    let t = records.len();
    let mut report = TrialReport::new(cfg);
    report.aggregate("bound", bound);
    report.aggregate("mean_ham", records.iter().map(|r| r["ham"]).sum::<f64>() / t as f64);
    report.aggregate("max_ham", records.iter().map(|r| r["ham"]).fold(0.0, f64::max));
    report.aggregate("hold_rate", frac(holds, t));
    report.verdict(
        8,
        "rounding keeps Hamming distance within (1 - kappa/2) w / 2",
        frac(holds, t) >= 0.99,
        format!("bound {bound:.1} held in {holds}/{t} trials"),
    );
    report.records = records;
    Ok(report)
}

pub fn coupling(cfg: &ExperimentConfig) -> Result<TrialReport> {
    let p = cfg.reader();
    let max_len = p.usize("max_len", 40)?;
    let points = p.usize("points", 6)?;
    p.finish()?;
    anyhow::ensure!(max_len >= 2 && points >= 1, "need max_len >= 2 and points >= 1");
    let records = par_trials(cfg, |t, h| {
        let mut rng = h.rng();
        let len = rng.gen_range(2..=max_len);
        let labels: Vec<Label> = (0..points).map(|_| Label::from_bit(rng.gen())).collect();
        let clean: Sample = (0..len)
            .map(|_| {
                let x = rng.gen_range(0..points);
                LabeledExample::new(x, labels[x])
            })
            .collect();
        let rate = rng.gen_range(0.1..0.6);
        let eligible: Vec<usize> = (0..len).filter(|_| rng.gen_bool(rate)).collect();
        let budget = rng.gen_range(0..=eligible.len() / 2);
        let replace = RandomReplace { domain_size: points };
        let nasty: &dyn NastyStrategy = if t % 2 == 0 { &FlipRandom } else { &replace };
        let adapter = NastyViaStrongMalicious { nasty, budget, filler: DomainPoint(rng.gen_range(0..points)) };
        let run = nasty_via_strong_malicious(&adapter, &clean, eligible.clone(), &mut rng)?;
        let mut r = Record::new();
        r.insert("len".into(), len as f64);
        r.insert("eligible".into(), eligible.len() as f64);
        r.insert("budget".into(), budget as f64);
        r.insert("malleable".into(), b2f(run.view.malleable));
        r.insert("ice_equal".into(), b2f(run.ice_equal()));
        r.insert("exact_equal".into(), b2f(run.exact_equal()));
        Ok(r)
    })?;
    let t = records.len();
    let ice = records.iter().filter(|r| r["ice_equal"] == 1.0).count();
    let exact = records.iter().filter(|r| r["exact_equal"] == 1.0).count();
    let mut report = TrialReport::new(cfg);
    report.aggregate("ice_equal_rate", frac(ice, t));
    report.aggregate("exact_equal_rate", frac(exact, t));
    report.flag("non_malleable", records.iter().filter(|r| r["malleable"] == 0.0).count());
    report.verdict(
        9,
        "strong malicious replay of a nasty strategy matches it after ICE",
        ice == t,
        format!("ICE multisets equal on {ice}/{t} trials; raw nasty output equal on {exact}/{t}"),
    );
    report.records = records;
    Ok(report)
}

/// Learner on `noise` output; `(recovered, failed, l1 to the codeword)`.
fn learn_once(
    fam: &std::sync::Arc<IceFamily>,
    h: nastynoise::RngHandle,
    noise: Option<&dyn StrongMaliciousStrategyFactory>,
) -> Result<(bool, bool, f64)> {
    let params = &fam.params;
    let mut rng = h.rng();
    let d = DiscreteDistribution::uniform(params.domain_size())?;
    let c = fam.random_concept(&mut rng)?;
    let clean = draw_clean_sample(&d, &c, params.n, &mut rng)?;
    let s = match noise {
        None => clean,
        Some(f) => strong_malicious_corrupt(&clean, NoiseRate::new(params.eta)?, f.make(&c).as_ref(), &mut rng)?.0,
    };
    let l1 = l1_distance(&IceLearner::new(fam.clone()).guesses(&ice_filter(&s))?, &c.codeword());
    match IceLearner::new(fam.clone()).run(&s, &mut rng) {
        Ok(out) => Ok((out.message == c.message, false, l1)),
        Err(Error::LearningFailure(_)) => Ok((false, true, l1)),
        Err(e) => Err(e.into()),
    }
}

trait StrongMaliciousStrategyFactory: Sync {
    fn make(&self, c: &nastynoise::icesep::IceConcept) -> Box<dyn StrongMaliciousStrategy>;
}

struct Flip;

impl StrongMaliciousStrategyFactory for Flip {
    fn make(&self, _: &nastynoise::icesep::IceConcept) -> Box<dyn StrongMaliciousStrategy> {
        Box::new(FlipEligible)
    }
}

struct BlockFlip;

impl StrongMaliciousStrategyFactory for BlockFlip {
    fn make(&self, c: &nastynoise::icesep::IceConcept) -> Box<dyn StrongMaliciousStrategy> {
        Box::new(KeyBlockFlipAdversary { concept: c.clone() })
    }
}

pub fn learner(cfg: &ExperimentConfig) -> Result<TrialReport> {
    let p = cfg.reader();
    let eta = p.f64("eta", 0.05)?;
    let kappa = p.f64("kappa", 0.7)?;
    let w = p.usize("w", 20)?;
    let d = p.usize("d", 10)?;
    let n = p.opt_usize("n")?;
    p.finish()?;
    let params = match n {
        Some(n) => IceSepParams::new(eta, kappa, w, d, n)?,
        None => IceSepParams::with_default_n(eta, kappa, w, d)?,
    };
    let dist = DiscreteDistribution::uniform(params.domain_size())?;
    let ideal_rate = NoiseRate::new(params.kappa * params.eta)?;
    let records = par_trials(cfg, |_, h| {
        let fam = IceFamily::generate(params.clone(), &mut h.child(0).rng())?;
        let (clean_ok, clean_fail, clean_l1) = learn_once(&fam, h.child(1), None)?;
        let (noisy_ok, noisy_fail, noisy_l1) = learn_once(&fam, h.child(2), Some(&Flip))?;
        let (_, _, attack_l1) = learn_once(&fam, h.child(3), Some(&BlockFlip))?;

        let mut rng = h.child(4).rng();
        let c = fam.random_concept(&mut rng)?;
        let clean = draw_clean_sample(&dist, &c, params.n, &mut rng)?;
        let need = idealized_need(&params, &clean);
        let (s, ledger) = nasty_corrupt(&clean, ideal_rate, &IceIdealizedAdversary { concept: c }, &mut rng)?;
        let vulnerable = !ledger.exhausted;
        let matched = vulnerable && idealized_survivors_match(&params, &clean, &s, &ledger);

        let mut r = Record::new();
        r.insert("clean_recovered".into(), b2f(clean_ok));
        r.insert("clean_failed".into(), b2f(clean_fail));
        r.insert("clean_l1".into(), clean_l1);
        r.insert("noisy_recovered".into(), b2f(noisy_ok));
        r.insert("noisy_failed".into(), b2f(noisy_fail));
        r.insert("noisy_l1".into(), noisy_l1);
        r.insert("attack_l1".into(), attack_l1);
        r.insert("ideal_need".into(), need as f64);
        r.insert("ideal_budget".into(), ledger.allowance as f64);
        r.insert("ideal_vulnerable".into(), b2f(vulnerable));
        r.insert("ideal_matched".into(), b2f(matched));
        Ok(r)
    })?;
    let t = records.len();
    let count = |k: &str| records.iter().filter(|r| r[k] == 1.0).count();
    let mean = |k: &str| records.iter().map(|r| r[k]).sum::<f64>() / t as f64;
    let max = |k: &str| records.iter().map(|r| r[k]).fold(0.0, f64::max);
    let (clean_ok, noisy_ok) = (count("clean_recovered"), count("noisy_recovered"));
    let (vulnerable, matched) = (count("ideal_vulnerable"), count("ideal_matched"));
    let l1_cap = 1.25 * params.l1_bound();
    let attack_within = records.iter().filter(|r| r["attack_l1"] <= l1_cap).count();

    let mut report = TrialReport::new(cfg);
    report.aggregate("n", params.n as f64);
    report.aggregate("block_size", params.block_size as f64);
    report.aggregate("r", params.r());
    report.aggregate("delta", params.delta());
    report.aggregate("radius", params.radius() as f64);
    report.aggregate("l1_bound", params.l1_bound());
    report.aggregate("clean_recovery_rate", frac(clean_ok, t));
    report.aggregate("noisy_recovery_rate", frac(noisy_ok, t));
    report.aggregate("vulnerable_rate", frac(vulnerable, t));
    report.aggregate("mean_clean_l1", mean("clean_l1"));
    report.aggregate("mean_noisy_l1", mean("noisy_l1"));
    report.aggregate("mean_attack_l1", mean("attack_l1"));
    report.aggregate("max_attack_l1", max("attack_l1"));
    report.flag("clean_decode_failures", count("clean_failed"));
    report.flag("noisy_decode_failures", count("noisy_failed"));
    report.flag("ideal_exhausted", t - vulnerable);
    report.verdict(
        10,
        "ICE learner recovers the key; idealized adversary leaves the predicted survivors",
        frac(clean_ok, t) >= 0.95 && frac(noisy_ok, t) >= 0.95 && matched == vulnerable,
        format!(
            "recovered {clean_ok}/{t} noiseless and {noisy_ok}/{t} at eta = {eta}; survivors matched on {matched}/{vulnerable} vulnerable trials"
        ),
    );
    report.verdict(
        0,
        "key-block flipping keeps the guess vector near the codeword",
        frac(attack_within, t) >= 0.95,
        format!(
            "||v - Enc||_1 <= {l1_cap:.2} in {attack_within}/{t} trials (mean {:.2}, max {:.2}, bound {:.2} before slack)",
            mean("attack_l1"),
            max("attack_l1"),
            params.l1_bound()
        ),
    );
    report.records = records;
    Ok(report)
}
