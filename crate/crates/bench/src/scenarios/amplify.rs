use std::sync::Arc;

use anyhow::{ensure, Result};
use nastynoise::learn::{amplify, amplify_components, bad_amplify, majority_label, AmplifyParams, Learner};
use nastynoise::noise::{nasty_corrupt, Corruption, NastyStrategy, NoiseRate, StrategyOutcome};
use nastynoise::stats::{binomial_ci, chi_square_binomial, SIGNIFICANCE, Z_99};
use nastynoise::{
    draw_clean_sample, error_rate, ConstantConcept, DiscreteDistribution, DomainPoint, Hypothesis, Label,
    LabeledExample, Sample, SimRng, TableConcept,
};
use rand::Rng;

use super::{b2f, frac, par_trials};
use crate::config::ExperimentConfig;
use crate::report::{Record, TrialReport};
use crate::strategies;

pub fn budget_law(cfg: &ExperimentConfig) -> Result<TrialReport> {
    let p = cfg.reader();
    let n = p.usize("n", 100)?;
    let eta = p.f64("eta", 0.2)?;
    let strategy = strategies::nasty(&p.string("strategy", "flip-random")?, 4)?;
    p.finish()?;
    let eta = NoiseRate::new(eta)?;
    let d = DiscreteDistribution::uniform(4)?;
    let c = ConstantConcept { domain_size: 4, label: Label::Pos };
    let records = par_trials(cfg, |_, h| {
        let mut rng = h.rng();
        let s = draw_clean_sample(&d, &c, n, &mut rng)?;
        let (_, ledger) = nasty_corrupt(&s, eta, strategy.as_ref(), &mut rng)?;
        let mut r = Record::new();
        r.insert("budget".into(), ledger.allowance as f64);
        r.insert("corruptions".into(), ledger.budget as f64);
        Ok(r)
    })?;
    let budgets: Vec<u64> = records.iter().map(|r| r["budget"] as u64).collect();
    let test = chi_square_binomial(&budgets, n as u64, eta.get())?;
    let mut report = TrialReport::new(cfg);
    report.aggregate("mean_budget", budgets.iter().sum::<u64>() as f64 / budgets.len() as f64);
    report.aggregate("chi_square", test.statistic);
    report.aggregate("p_value", test.p_value);
    report.verdict(
        2,
        "nasty budget follows Bin(n, eta)",
        test.passes(SIGNIFICANCE),
        format!("chi2 = {:.3} on {} dof, p = {:.4}", test.statistic, test.dof, test.p_value),
    );
    report.records = records;
    Ok(report)
}

/// Majority label, then with probability `eps` its negation.
struct EpsilonFlipLearner {
    n: usize,
    eps: f64,
    domain_size: usize,
}

impl Learner for EpsilonFlipLearner {
    fn sample_size(&self) -> usize {
        self.n
    }

    fn learn(&self, s: &Sample, rng: &mut SimRng) -> nastynoise::Result<Hypothesis> {
        let b = majority_label(s);
        let b = if rng.gen_bool(self.eps) { b.flip() } else { b };
        Ok(Hypothesis::constant(self.domain_size, b))
    }
}

pub fn concentration(cfg: &ExperimentConfig) -> Result<TrialReport> {
    let p = cfg.reader();
    let eps = p.f64("eps", 0.2)?;
    let eta = p.f64("eta", 0.2)?;
    let n = p.usize("n", 50)?;
    let k = p.usize("k", 64)?;
    let strategy = strategies::nasty(&p.string("strategy", "flip-first")?, 8)?;
    p.finish()?;
    let eta = NoiseRate::new(eta)?;
    let d = DiscreteDistribution::uniform(8)?;
    let learner = EpsilonFlipLearner { n, eps, domain_size: 8 };
    let params = AmplifyParams::new(k, 0.1, 0.05)?;
    let threshold = eps * k as f64 + 3.0 * (k as f64 * 20f64.ln()).sqrt();
    let records = par_trials(cfg, |_, h| {
        let mut rng = h.child(0).rng();
        let c = ConstantConcept { domain_size: 8, label: Label::from_bit(rng.gen()) };
        let s = draw_clean_sample(&d, &c, n * k, &mut rng)?;
        let (s, _) = nasty_corrupt(&s, eta, strategy.as_ref(), &mut rng)?;
        let hs = amplify_components(&learner, &params, &s, h.child(1))?;
        let total: f64 = hs.iter().map(|g| error_rate(g, &c, &d)).sum::<nastynoise::Result<f64>>()?;
        let mut r = Record::new();
        r.insert("sum_error".into(), total);
        r.insert("exceeds".into(), b2f(total > threshold));
        Ok(r)
    })?;
    let exceed = records.iter().filter(|r| r["exceeds"] == 1.0).count();
    let mut report = TrialReport::new(cfg);
    report.aggregate("threshold", threshold);
    report.aggregate("mean_sum_error", records.iter().map(|r| r["sum_error"]).sum::<f64>() / records.len() as f64);
    report.aggregate("exceed_rate", frac(exceed, records.len()));
    report.verdict(
        3,
        "summed component error concentrates below eps k + 3 sqrt(k ln 20)",
        frac(exceed, records.len()) < 0.05,
        format!("{exceed}/{} trials above {threshold:.2}", records.len()),
    );
    report.records = records;
    Ok(report)
}

/// The counterexample domain: `n_small` ordinary points followed by one large
/// point standing for the subset `appear` of them.
#[derive(Clone, Debug)]
pub struct BadAmplifyWorld {
    pub n_small: usize,
    pub appear: Vec<u64>,
}

impl BadAmplifyWorld {
    pub fn new(n_small: usize, clean: &Sample) -> Self {
        let mut appear = vec![0u64; n_small.div_ceil(64)];
        for e in clean {
            if e.point.0 < n_small {
                appear[e.point.0 / 64] |= 1 << (e.point.0 % 64);
            }
        }
        Self { n_small, appear }
    }

    pub fn large(&self) -> DomainPoint {
        DomainPoint(self.n_small)
    }

    pub fn domain_size(&self) -> usize {
        self.n_small + 1
    }

    pub fn contains(&self, x: usize) -> bool {
        x < self.n_small && self.appear[x / 64] >> (x % 64) & 1 == 1
    }

    pub fn distribution(&self) -> nastynoise::Result<DiscreteDistribution> {
        DiscreteDistribution::uniform_prefix(self.n_small, self.domain_size())
    }
}

/// Majority bit `b`; with probability `1 - eps` the constant `b`, otherwise
/// `b` on the large point and its subset and `-b` elsewhere.
pub struct BadAmplifyLearner {
    pub n: usize,
    pub eps: f64,
    pub world: Arc<BadAmplifyWorld>,
}

impl Learner for BadAmplifyLearner {
    fn sample_size(&self) -> usize {
        self.n
    }

    fn learn(&self, s: &Sample, rng: &mut SimRng) -> nastynoise::Result<Hypothesis> {
        let b = majority_label(s);
        let size = self.world.domain_size();
        if rng.gen_bool(1.0 - self.eps) {
            return Ok(Hypothesis::constant(size, b));
        }
        let large = self.world.large();
        let seen = s.iter().any(|e| e.point == large);
        let labels = (0..size)
            .map(|x| if seen && (x == large.0 || self.world.contains(x)) { b } else { b.flip() })
            .collect();
        Ok(Hypothesis::deterministic(TableConcept::new(labels)))
    }
}

/// Writes `(x_large, b*)` over the first `z` positions.
pub struct LargePointAdversary {
    pub example: LabeledExample,
}

impl NastyStrategy for LargePointAdversary {
    fn corrupt(&self, clean: &Sample, budget: usize, _: &mut SimRng) -> StrategyOutcome {
        StrategyOutcome::new(
            (0..budget.min(clean.len())).map(|i| Corruption { index: i, replacement: self.example }).collect(),
        )
    }
}

pub fn badamplify(cfg: &ExperimentConfig) -> Result<TrialReport> {
    let p = cfg.reader();
    let eps = p.f64("eps", 0.3)?;
    let eta = p.f64("eta", 0.25)?;
    let n = p.usize("n", 60)?;
    let k = p.usize("k", 10)?;
    let n_test = p.usize("n_test", 40)?;
    p.finish()?;
    ensure!((0.01..=0.49).contains(&eta), "eta must lie in [0.01, 0.49]");
    ensure!((0.0..=1.0).contains(&eps), "eps must lie in [0, 1]");
    let eta = NoiseRate::new(eta)?;
    let n_small = 100 * (n * k + n_test);
    let params = AmplifyParams::new(k, 0.1, 0.05)?;

    let run = |h: nastynoise::RngHandle, size: usize| -> Result<(Arc<BadAmplifyWorld>, ConstantConcept, Sample)> {
        let mut rng = h.rng();
        let c = ConstantConcept { domain_size: n_small + 1, label: Label::from_bit(rng.gen()) };
        let d = DiscreteDistribution::uniform_prefix(n_small, n_small + 1)?;
        let clean = draw_clean_sample(&d, &c, size, &mut rng)?;
        let world = Arc::new(BadAmplifyWorld::new(n_small, &clean));
        let adv = LargePointAdversary { example: LabeledExample { point: world.large(), label: c.label } };
        let (s, _) = nasty_corrupt(&clean, eta, &adv, &mut rng)?;
        Ok((world, c, s))
    };

    let records = par_trials(cfg, |_, h| {
        let (world, c, s) = run(h.child(0), n * k + n_test)?;
        let d = world.distribution()?;
        let learner = BadAmplifyLearner { n, eps, world: world.clone() };
        let pick = bad_amplify(&learner, k, n_test, &s, h.child(1))?;
        let chosen = error_rate(&pick.hypothesis, &c, &d)?;
        let bad_candidates = pick
            .candidates
            .iter()
            .map(|g| error_rate(g, &c, &d).map(|e| e >= 0.99))
            .collect::<nastynoise::Result<Vec<bool>>>()?;

        let (world, c, s) = run(h.child(2), n * k)?;
        let d = world.distribution()?;
        let learner = BadAmplifyLearner { n, eps, world };
        let mixture = error_rate(&amplify(&learner, &params, &s, h.child(3))?, &c, &d)?;

        let mut r = Record::new();
        r.insert("chosen_error".into(), chosen);
        r.insert("bad".into(), b2f(chosen >= 0.99));
        r.insert("bad_candidates".into(), bad_candidates.iter().filter(|&&b| b).count() as f64);
        r.insert("zero_test_error".into(), pick.test_errors.iter().filter(|&&e| e == 0.0).count() as f64);
        r.insert("mixture_error".into(), mixture);
        r.insert("mixture_over".into(), b2f(mixture > 0.4));
        Ok(r)
    })?;

    let t = records.len();
    let bad = records.iter().filter(|r| r["bad"] == 1.0).count();
    let over = records.iter().filter(|r| r["mixture_over"] == 1.0).count();
    let ci = binomial_ci(bad as u64, t as u64, Z_99)?;
    let mean_mixture = records.iter().map(|r| r["mixture_error"]).sum::<f64>() / t as f64;
    let mut report = TrialReport::new(cfg);
    report.aggregate("bad_rate", ci.estimate);
    report.aggregate("bad_rate_ci_low", ci.low);
    report.aggregate("bad_rate_ci_high", ci.high);
    report.aggregate("gap_to_eps", eps - ci.estimate);
    report.aggregate("mixture_over_rate", frac(over, t));
    report.aggregate("mean_mixture_error", mean_mixture);
    let bad_ok = (0.25..=0.35).contains(&ci.estimate);
    let mix_ok = frac(over, t) < 0.01;
    report.verdict(
        4,
        "holdout selection outputs an error >= 0.99 hypothesis at rate ~eps; mixing stays below 0.4",
        bad_ok && mix_ok,
        format!(
            "bad rate {:.4} [{:.4}, {:.4}] (target [0.25, 0.35]); mixture > 0.4 in {:.4} of trials (target < 0.01), mean mixture error {:.4}",
            ci.estimate,
            ci.low,
            ci.high,
            frac(over, t),
            mean_mixture
        ),
    );
    report.records = records;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nastynoise::RngHandle;

    #[test]
    fn world_membership() {
        let s = Sample::from_vec(vec![LabeledExample::new(3, Label::Pos), LabeledExample::new(130, Label::Pos)]);
        let w = BadAmplifyWorld::new(200, &s);
        assert!(w.contains(3) && w.contains(130) && !w.contains(4) && !w.contains(200));
        assert_eq!(w.large(), DomainPoint(200));
    }

    #[test]
    fn tails_hypothesis_is_perfect_on_appearing_points() {
        let s = Sample::from_vec(vec![LabeledExample::new(3, Label::Neg), LabeledExample::new(200, Label::Neg)]);
        let world = Arc::new(BadAmplifyWorld::new(200, &s));
        let learner = BadAmplifyLearner { n: 2, eps: 1.0, world: world.clone() };
        let h = learner.learn(&s, &mut RngHandle::from_seed(1).rng()).unwrap();
        let c = ConstantConcept { domain_size: 201, label: Label::Neg };
        assert_eq!(h.disagreement(DomainPoint(3), Label::Neg), 0.0);
        assert!(error_rate(&h, &c, &world.distribution().unwrap()).unwrap() >= 0.99);
    }

    #[test]
    fn zero_eps_never_goes_bad() {
        let cfg = ExperimentConfig::new("badamplify", 40, 3).unwrap().with("eps", 0.0);
        let report = badamplify(&cfg).unwrap();
        assert_eq!(report.aggregates["bad_rate"], 0.0);
    }
}
