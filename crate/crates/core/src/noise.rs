//! Corruption processes.
//!
//! Each corruptor returns the corrupted sample together with a
//! [`CorruptionLedger`]. Adversaries plug in through one of three strategy
//! traits, matching how much they get to see:
//!
//! * [`OnlineStrategy`] sees only the examples already emitted (malicious noise);
//! * [`StrongMaliciousStrategy`] sees the whole clean sample and the set of
//!   corruptible positions;
//! * [`NastyStrategy`] sees the whole clean sample and a corruption budget
//!   drawn before it runs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{
    check_size, draw_clean_sample, Concept, DiscreteDistribution, DomainPoint, LabeledExample, Sample,
};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// A noise rate in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NoiseRate(f64);

impl NoiseRate {
    pub fn new(eta: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&eta) {
            Ok(Self(eta))
        } else {
            Err(Error::InvalidParameter(format!("noise rate {eta} outside [0, 1]")))
        }
    }

    pub const fn zero() -> Self {
        Self(0.0)
    }

    pub const fn get(self) -> f64 {
        self.0
    }

    /// `floor(eta * n)`, robust to products such as `0.29 * 100`.
    pub fn floor_of(self, n: usize) -> usize {
        (self.0 * n as f64 + 1e-9).floor() as usize
    }

    fn coin(self, rng: &mut SimRng) -> bool {
        rng.gen_bool(self.0)
    }
}

impl TryFrom<f64> for NoiseRate {
    type Error = Error;
    fn try_from(eta: f64) -> Result<Self> {
        Self::new(eta)
    }
}

impl From<NoiseRate> for f64 {
    fn from(eta: NoiseRate) -> f64 {
        eta.0
    }
}

/// One replacement chosen by an adversary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corruption {
    pub index: usize,
    pub replacement: LabeledExample,
}

/// What a full-knowledge strategy decided to do.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StrategyOutcome {
    pub corruptions: Vec<Corruption>,
    /// Set when the strategy could not finish its plan within its budget.
    pub exhausted: bool,
}

impl StrategyOutcome {
    pub fn new(corruptions: Vec<Corruption>) -> Self {
        Self { corruptions, exhausted: false }
    }
}

/// Record of an adversary's actions on one sample.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorruptionLedger {
    /// Corrupted positions in increasing order.
    pub corrupted_indices: Vec<usize>,
    /// Clean examples that were overwritten, aligned with `corrupted_indices`.
    pub replaced: Vec<LabeledExample>,
    /// Examples written in their place, aligned with `corrupted_indices`.
    pub introduced: Vec<LabeledExample>,
    /// Number of corrupted positions.
    pub budget: usize,
    /// What the adversary was allowed: the drawn budget, `floor(eta n)`, or `|Z|`.
    pub allowance: usize,
    /// Positions the adversary was allowed to touch, when that is a set.
    pub eligible: Vec<usize>,
    pub exhausted: bool,
}

impl CorruptionLedger {
    fn from_corruptions(clean: &Sample, mut corruptions: Vec<Corruption>, allowance: usize) -> Self {
        corruptions.sort_by_key(|c| c.index);
        Self {
            corrupted_indices: corruptions.iter().map(|c| c.index).collect(),
            replaced: corruptions.iter().map(|c| clean[c.index]).collect(),
            introduced: corruptions.iter().map(|c| c.replacement).collect(),
            budget: corruptions.len(),
            allowance,
            eligible: Vec::new(),
            exhausted: false,
        }
    }

    /// Writes `introduced` over `clean` at the corrupted positions.
    pub fn apply(&self, clean: &Sample) -> Result<Sample> {
        let mut out = clean.clone();
        for (&i, &e) in self.corrupted_indices.iter().zip(&self.introduced) {
            if i >= out.len() {
                return Err(Error::PointOutOfRange { point: i, size: out.len() });
            }
            out.as_mut_slice()[i] = e;
        }
        Ok(out)
    }

    pub fn is_consistent(&self) -> bool {
        self.corrupted_indices.len() == self.budget
            && self.replaced.len() == self.budget
            && self.introduced.len() == self.budget
            && self.corrupted_indices.windows(2).all(|w| w[0] < w[1])
    }

    pub fn is_corrupted(&self, index: usize) -> bool {
        self.corrupted_indices.binary_search(&index).is_ok()
    }
}

/// Adversary for malicious noise; sees only what has been emitted so far.
pub trait OnlineStrategy: Send + Sync {
    fn choose(&self, emitted: &[LabeledExample], index: usize, rng: &mut SimRng) -> LabeledExample;
}

/// Adversary for strong malicious noise; may write only inside `eligible`.
pub trait StrongMaliciousStrategy: Send + Sync {
    fn corrupt(&self, clean: &Sample, eligible: &[usize], rng: &mut SimRng) -> StrategyOutcome;
}

/// Adversary for nasty noise; may replace at most `budget` examples.
pub trait NastyStrategy: Send + Sync {
    fn corrupt(&self, clean: &Sample, budget: usize, rng: &mut SimRng) -> StrategyOutcome;
}

fn validate_indices(corruptions: &[Corruption], n: usize, allowed: Option<&[usize]>) -> Result<()> {
    let mut seen = vec![false; n];
    for c in corruptions {
        if c.index >= n {
            return Err(Error::ProtocolViolation(format!("index {} outside a sample of {n}", c.index)));
        }
        if std::mem::replace(&mut seen[c.index], true) {
            return Err(Error::ProtocolViolation(format!("index {} corrupted twice", c.index)));
        }
        if let Some(allowed) = allowed {
            if allowed.binary_search(&c.index).is_err() {
                return Err(Error::ProtocolViolation(format!("index {} is not corruptible", c.index)));
            }
        }
    }
    Ok(())
}

fn count_coins(n: usize, eta: NoiseRate, rng: &mut SimRng) -> usize {
    (0..n).filter(|_| eta.coin(rng)).count()
}

/// Malicious noise: each example is independently handed to the adversary
/// with probability `eta`.
pub fn malicious_corrupt<C: Concept + ?Sized>(
    d: &DiscreteDistribution,
    c: &C,
    n: usize,
    eta: NoiseRate,
    strategy: &dyn OnlineStrategy,
    rng: &mut SimRng,
) -> Result<(Sample, CorruptionLedger)> {
    check_size(d.len(), c.domain_size())?;
    let mut emitted = Vec::with_capacity(n);
    let mut ledger = CorruptionLedger::default();
    for i in 0..n {
        let x = d.sample_point(rng);
        let clean = LabeledExample { point: x, label: c.label(x) };
        if eta.coin(rng) {
            let choice = strategy.choose(&emitted, i, rng);
            if choice.point.0 >= d.len() {
                return Err(Error::ProtocolViolation(format!(
                    "online choice {} outside a domain of {}",
                    choice.point.0,
                    d.len()
                )));
            }
            ledger.corrupted_indices.push(i);
            ledger.replaced.push(clean);
            ledger.introduced.push(choice);
            emitted.push(choice);
        } else {
            emitted.push(clean);
        }
    }
    ledger.budget = ledger.corrupted_indices.len();
    ledger.allowance = ledger.budget;
    ledger.eligible = ledger.corrupted_indices.clone();
    Ok((Sample::from_vec(emitted), ledger))
}

/// Strong malicious noise: the corruptible set is drawn by independent
/// `eta`-coins, then the strategy sees everything.
pub fn strong_malicious_corrupt(
    clean: &Sample,
    eta: NoiseRate,
    strategy: &dyn StrongMaliciousStrategy,
    rng: &mut SimRng,
) -> Result<(Sample, CorruptionLedger)> {
    let eligible: Vec<usize> = (0..clean.len()).filter(|_| eta.coin(rng)).collect();
    strong_malicious_with(clean, eligible, strategy, rng)
}

/// Strong malicious noise with a given corruptible set.
pub fn strong_malicious_with(
    clean: &Sample,
    eligible: Vec<usize>,
    strategy: &dyn StrongMaliciousStrategy,
    rng: &mut SimRng,
) -> Result<(Sample, CorruptionLedger)> {
    let outcome = strategy.corrupt(clean, &eligible, rng);
    validate_indices(&outcome.corruptions, clean.len(), Some(&eligible))?;
    let mut ledger = CorruptionLedger::from_corruptions(clean, outcome.corruptions, eligible.len());
    ledger.eligible = eligible;
    ledger.exhausted = outcome.exhausted;
    Ok((ledger.apply(clean)?, ledger))
}

/// Nasty noise: the budget `z ~ Bin(n, eta)` is drawn first, then the
/// strategy sees the clean sample and `z`.
pub fn nasty_corrupt(
    clean: &Sample,
    eta: NoiseRate,
    strategy: &dyn NastyStrategy,
    rng: &mut SimRng,
) -> Result<(Sample, CorruptionLedger)> {
    let z = count_coins(clean.len(), eta, rng);
    nasty_with_budget(clean, z, strategy, rng)
}

/// Nasty noise with a given budget.
pub fn nasty_with_budget(
    clean: &Sample,
    z: usize,
    strategy: &dyn NastyStrategy,
    rng: &mut SimRng,
) -> Result<(Sample, CorruptionLedger)> {
    let outcome = strategy.corrupt(clean, z, rng);
    if outcome.corruptions.len() > z {
        return Err(Error::ProtocolViolation(format!(
            "{} corruptions exceed budget {z}",
            outcome.corruptions.len()
        )));
    }
    validate_indices(&outcome.corruptions, clean.len(), None)?;
    let mut ledger = CorruptionLedger::from_corruptions(clean, outcome.corruptions, z);
    ledger.exhausted = outcome.exhausted;
    Ok((ledger.apply(clean)?, ledger))
}

/// Fixed-rate nasty noise: exactly `floor(eta n)` replacements.
pub fn fixed_rate_nasty_corrupt(
    clean: &Sample,
    eta: NoiseRate,
    strategy: &dyn NastyStrategy,
    rng: &mut SimRng,
) -> Result<(Sample, CorruptionLedger)> {
    let z = eta.floor_of(clean.len());
    let outcome = strategy.corrupt(clean, z, rng);
    if outcome.corruptions.len() != z {
        return Err(Error::ProtocolViolation(format!(
            "{} corruptions where exactly {z} are required",
            outcome.corruptions.len()
        )));
    }
    validate_indices(&outcome.corruptions, clean.len(), None)?;
    let mut ledger = CorruptionLedger::from_corruptions(clean, outcome.corruptions, z);
    ledger.exhausted = outcome.exhausted;
    Ok((ledger.apply(clean)?, ledger))
}

/// Huber contamination: each example is clean with probability `1 - eta`
/// and otherwise drawn from `outliers` over the labeled index space.
pub fn huber_sample<C: Concept + ?Sized>(
    d: &DiscreteDistribution,
    c: &C,
    eta: NoiseRate,
    outliers: &DiscreteDistribution,
    n: usize,
    rng: &mut SimRng,
) -> Result<Sample> {
    check_size(d.len(), c.domain_size())?;
    check_size(2 * d.len(), outliers.len())?;
    Ok((0..n)
        .map(|_| {
            if eta.coin(rng) {
                LabeledExample::from_labeled_index(outliers.sample_index(rng))
            } else {
                let x = d.sample_point(rng);
                LabeledExample { point: x, label: c.label(x) }
            }
        })
        .collect())
}

/// Exact per-example law of Huber contamination: `(1 - eta) D_c + eta O`.
pub fn huber_marginal(dc: &DiscreteDistribution, eta: NoiseRate, outliers: &DiscreteDistribution) -> Result<Vec<f64>> {
    check_size(dc.len(), outliers.len())?;
    let e = eta.get();
    Ok(dc.weights().iter().zip(outliers.weights()).map(|(p, o)| (1.0 - e) * p + e * o).collect())
}

/// Half the L1 distance between two distributions on the same space.
pub fn tv_distance(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    tv_distance_weights(p.weights(), q.weights())
}

pub fn tv_distance_weights(p: &[f64], q: &[f64]) -> Result<f64> {
    check_size(p.len(), q.len())?;
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Accepts `dprime` as a TV adversary's distribution when it is within `eta`
/// of the clean labeled distribution.
pub fn tv_corrupt(
    dc: &DiscreteDistribution,
    eta: NoiseRate,
    dprime: DiscreteDistribution,
) -> Result<DiscreteDistribution> {
    let distance = tv_distance(dc, &dprime)?;
    if distance > eta.get() + 1e-12 {
        return Err(Error::TvBudgetExceeded { distance, budget: eta.get() });
    }
    Ok(dprime)
}

/// Builds a TV adversary's distribution by removing mass from some atoms and
/// adding the same total to others.
#[derive(Clone, Debug)]
pub struct MassTransfer {
    weights: Vec<f64>,
    removed: f64,
    added: f64,
}

impl MassTransfer {
    pub fn from(base: &DiscreteDistribution) -> Self {
        Self { weights: base.weights().to_vec(), removed: 0.0, added: 0.0 }
    }

    pub fn remove(mut self, index: usize, mass: f64) -> Result<Self> {
        let w = self
            .weights
            .get_mut(index)
            .ok_or(Error::PointOutOfRange { point: index, size: 0 })?;
        if mass < 0.0 || mass > *w + 1e-15 {
            return Err(Error::InvalidParameter(format!("cannot remove {mass} from an atom of {w}")));
        }
        *w = (*w - mass).max(0.0);
        self.removed += mass;
        Ok(self)
    }

    pub fn add(mut self, index: usize, mass: f64) -> Result<Self> {
        let size = self.weights.len();
        let w = self
            .weights
            .get_mut(index)
            .ok_or(Error::PointOutOfRange { point: index, size })?;
        if mass < 0.0 {
            return Err(Error::InvalidParameter(format!("cannot add negative mass {mass}")));
        }
        *w += mass;
        self.added += mass;
        Ok(self)
    }

    pub fn build(self) -> Result<DiscreteDistribution> {
        if (self.removed - self.added).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "removed {} but added {}",
                self.removed, self.added
            )));
        }
        DiscreteDistribution::from_weights(self.weights)
    }
}

/// A source of possibly corrupted samples, for expected-error estimates.
pub trait NoiseProcess: Send + Sync {
    fn generate(&self, d: &DiscreteDistribution, c: &dyn Concept, n: usize, rng: &mut SimRng) -> Result<Sample>;
}

/// No corruption.
#[derive(Clone, Copy, Debug, Default)]
pub struct Clean;

impl NoiseProcess for Clean {
    fn generate(&self, d: &DiscreteDistribution, c: &dyn Concept, n: usize, rng: &mut SimRng) -> Result<Sample> {
        draw_clean_sample(d, c, n, rng)
    }
}

/// Nasty noise with a fixed strategy.
pub struct Nasty<S> {
    pub eta: NoiseRate,
    pub strategy: S,
}

impl<S: NastyStrategy> NoiseProcess for Nasty<S> {
    fn generate(&self, d: &DiscreteDistribution, c: &dyn Concept, n: usize, rng: &mut SimRng) -> Result<Sample> {
        let clean = draw_clean_sample(d, c, n, rng)?;
        Ok(nasty_corrupt(&clean, self.eta, &self.strategy, rng)?.0)
    }
}

/// Malicious noise with a fixed online strategy.
pub struct Malicious<S> {
    pub eta: NoiseRate,
    pub strategy: S,
}

impl<S: OnlineStrategy> NoiseProcess for Malicious<S> {
    fn generate(&self, d: &DiscreteDistribution, c: &dyn Concept, n: usize, rng: &mut SimRng) -> Result<Sample> {
        Ok(malicious_corrupt(d, c, n, self.eta, &self.strategy, rng)?.0)
    }
}

/// Strong malicious noise with a fixed strategy.
pub struct StrongMalicious<S> {
    pub eta: NoiseRate,
    pub strategy: S,
}

impl<S: StrongMaliciousStrategy> NoiseProcess for StrongMalicious<S> {
    fn generate(&self, d: &DiscreteDistribution, c: &dyn Concept, n: usize, rng: &mut SimRng) -> Result<Sample> {
        let clean = draw_clean_sample(d, c, n, rng)?;
        Ok(strong_malicious_corrupt(&clean, self.eta, &self.strategy, rng)?.0)
    }
}

/// Huber contamination with a fixed outlier law.
pub struct Huber {
    pub eta: NoiseRate,
    pub outliers: DiscreteDistribution,
}

impl NoiseProcess for Huber {
    fn generate(&self, d: &DiscreteDistribution, c: &dyn Concept, n: usize, rng: &mut SimRng) -> Result<Sample> {
        huber_sample(d, c, self.eta, &self.outliers, n, rng)
    }
}

/// Nasty strategy that never corrupts.
#[derive(Clone, Copy, Debug, Default)]
pub struct Passive;

impl NastyStrategy for Passive {
    fn corrupt(&self, _: &Sample, _: usize, _: &mut SimRng) -> StrategyOutcome {
        StrategyOutcome::default()
    }
}

impl StrongMaliciousStrategy for Passive {
    fn corrupt(&self, _: &Sample, _: &[usize], _: &mut SimRng) -> StrategyOutcome {
        StrategyOutcome::default()
    }
}

/// Flips the labels of the first `budget` examples.
#[derive(Clone, Copy, Debug, Default)]
pub struct FlipFirst;

impl NastyStrategy for FlipFirst {
    fn corrupt(&self, clean: &Sample, budget: usize, _: &mut SimRng) -> StrategyOutcome {
        StrategyOutcome::new(
            (0..budget.min(clean.len()))
                .map(|i| Corruption { index: i, replacement: clean[i].contradiction() })
                .collect(),
        )
    }
}

/// Flips the labels of `budget` uniformly chosen examples.
#[derive(Clone, Copy, Debug, Default)]
pub struct FlipRandom;

impl NastyStrategy for FlipRandom {
    fn corrupt(&self, clean: &Sample, budget: usize, rng: &mut SimRng) -> StrategyOutcome {
        let k = budget.min(clean.len());
        let mut idx = rand::seq::index::sample(rng, clean.len(), k).into_vec();
        idx.sort_unstable();
        StrategyOutcome::new(
            idx.into_iter().map(|i| Corruption { index: i, replacement: clean[i].contradiction() }).collect(),
        )
    }
}

/// Replaces `budget` uniformly chosen examples with uniform labeled examples.
#[derive(Clone, Copy, Debug)]
pub struct RandomReplace {
    pub domain_size: usize,
}

impl NastyStrategy for RandomReplace {
    fn corrupt(&self, clean: &Sample, budget: usize, rng: &mut SimRng) -> StrategyOutcome {
        let k = budget.min(clean.len());
        let mut idx = rand::seq::index::sample(rng, clean.len(), k).into_vec();
        idx.sort_unstable();
        StrategyOutcome::new(
            idx.into_iter()
                .map(|i| Corruption {
                    index: i,
                    replacement: LabeledExample::from_labeled_index(rng.gen_range(0..2 * self.domain_size)),
                })
                .collect(),
        )
    }
}

/// Strong malicious strategy flipping the label at every corruptible position.
#[derive(Clone, Copy, Debug, Default)]
pub struct FlipEligible;

impl StrongMaliciousStrategy for FlipEligible {
    fn corrupt(&self, clean: &Sample, eligible: &[usize], _: &mut SimRng) -> StrategyOutcome {
        StrategyOutcome::new(
            eligible.iter().map(|&i| Corruption { index: i, replacement: clean[i].contradiction() }).collect(),
        )
    }
}

/// Strong malicious strategy writing back the clean example everywhere.
#[derive(Clone, Copy, Debug, Default)]
pub struct CopyClean;

impl StrongMaliciousStrategy for CopyClean {
    fn corrupt(&self, clean: &Sample, eligible: &[usize], _: &mut SimRng) -> StrategyOutcome {
        StrategyOutcome::new(eligible.iter().map(|&i| Corruption { index: i, replacement: clean[i] }).collect())
    }
}

/// Strong malicious strategy filling corruptible positions with
/// `(x, +1), (x, -1)` pairs at a fixed point.
#[derive(Clone, Copy, Debug)]
pub struct ContradictPairs {
    pub point: DomainPoint,
}

impl StrongMaliciousStrategy for ContradictPairs {
    fn corrupt(&self, _: &Sample, eligible: &[usize], _: &mut SimRng) -> StrategyOutcome {
        let pairs = eligible.len() / 2;
        StrategyOutcome::new(
            eligible[..2 * pairs]
                .iter()
                .enumerate()
                .map(|(t, &i)| Corruption {
                    index: i,
                    replacement: LabeledExample {
                        point: self.point,
                        label: if t % 2 == 0 { crate::Label::Pos } else { crate::Label::Neg },
                    },
                })
                .collect(),
        )
    }
}

/// Online strategy emitting one fixed example.
#[derive(Clone, Copy, Debug)]
pub struct ConstantChoice(pub LabeledExample);

impl OnlineStrategy for ConstantChoice {
    fn choose(&self, _: &[LabeledExample], _: usize, _: &mut SimRng) -> LabeledExample {
        self.0
    }
}

/// Online strategy drawing each replacement from an outlier law; this is
/// Huber contamination played by a malicious adversary.
#[derive(Clone, Debug)]
pub struct OutlierDraw {
    pub outliers: DiscreteDistribution,
}

impl OutlierDraw {
    /// Exact law of a single choice over the labeled index space.
    pub fn choice_law(&self) -> &DiscreteDistribution {
        &self.outliers
    }
}

impl OnlineStrategy for OutlierDraw {
    fn choose(&self, _: &[LabeledExample], _: usize, rng: &mut SimRng) -> LabeledExample {
        LabeledExample::from_labeled_index(self.outliers.sample_index(rng))
    }
}

/// Exact per-example law of malicious noise whose adversary draws every
/// replacement from `choice_law`: `(1 - eta) D_c + eta choice_law`.
pub fn malicious_marginal_oblivious(
    dc: &DiscreteDistribution,
    eta: NoiseRate,
    choice_law: &DiscreteDistribution,
) -> Result<Vec<f64>> {
    check_size(dc.len(), choice_law.len())?;
    let e = eta.get();
    Ok(dc
        .weights()
        .iter()
        .zip(choice_law.weights())
        .map(|(p, q)| (1.0 - e) * p + e * q)
        .collect())
}

/// Runs a standard nasty strategy with its own budget and then makes exactly
/// `budget` corruptions: its first `budget` choices, padded with identity
/// replacements at the lowest untouched positions.
pub struct TrackStandard<'a> {
    pub standard: &'a dyn NastyStrategy,
    pub standard_budget: usize,
}

impl NastyStrategy for TrackStandard<'_> {
    fn corrupt(&self, clean: &Sample, budget: usize, rng: &mut SimRng) -> StrategyOutcome {
        let mut outcome = self.standard.corrupt(clean, self.standard_budget, rng);
        outcome.corruptions.truncate(budget);
        let mut used = vec![false; clean.len()];
        for c in &outcome.corruptions {
            used[c.index] = true;
        }
        let mut i = 0;
        while outcome.corruptions.len() < budget && i < clean.len() {
            if !used[i] {
                outcome.corruptions.push(Corruption { index: i, replacement: clean[i] });
            }
            i += 1;
        }
        outcome
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ConstantConcept, Label, TableConcept};
    use crate::rng::RngHandle;
    use crate::stats::within_sigmas;

    fn rng(seed: u64) -> SimRng {
        RngHandle::from_seed(seed).rng()
    }

    fn eta(e: f64) -> NoiseRate {
        NoiseRate::new(e).unwrap()
    }

    fn concept() -> TableConcept {
        TableConcept::new(vec![Label::Pos, Label::Neg, Label::Pos, Label::Neg])
    }

    #[test]
    fn malicious_zero_rate_is_clean() {
        let d = DiscreteDistribution::uniform(4).unwrap();
        let c = concept();
        let strat = ConstantChoice(LabeledExample::new(0, Label::Neg));
        let (s, l) = malicious_corrupt(&d, &c, 50, NoiseRate::zero(), &strat, &mut rng(1)).unwrap();
        assert!(s.iter().all(|e| c.label(e.point) == e.label));
        assert_eq!(l.budget, 0);
    }

    #[test]
    fn malicious_full_rate_constant() {
        let d = DiscreteDistribution::uniform(4).unwrap();
        let x0 = LabeledExample::new(2, Label::Pos);
        let (s, l) = malicious_corrupt(&d, &concept(), 30, eta(1.0), &ConstantChoice(x0), &mut rng(2)).unwrap();
        assert!(s.iter().all(|e| *e == x0));
        assert_eq!(l.budget, 30);
    }

    #[test]
    fn malicious_budget_is_binomial() {
        let d = DiscreteDistribution::uniform(4).unwrap();
        let strat = ConstantChoice(LabeledExample::new(0, Label::Neg));
        let (_, l) = malicious_corrupt(&d, &concept(), 10_000, eta(0.25), &strat, &mut rng(3)).unwrap();
        assert!(within_sigmas(l.budget as f64, 10_000, 0.25, 4.0));
        assert!(l.is_consistent());
    }

    #[test]
    fn malicious_rejects_out_of_domain_choice() {
        let d = DiscreteDistribution::uniform(4).unwrap();
        let strat = ConstantChoice(LabeledExample::new(9, Label::Neg));
        let r = malicious_corrupt(&d, &concept(), 100, eta(0.5), &strat, &mut rng(4));
        assert!(matches!(r, Err(Error::ProtocolViolation(_))));
    }

    fn clean_sample(n: usize, seed: u64) -> Sample {
        let d = DiscreteDistribution::uniform(4).unwrap();
        draw_clean_sample(&d, &concept(), n, &mut rng(seed)).unwrap()
    }

    #[test]
    fn strong_malicious_examples() {
        let s = clean_sample(40, 5);
        let (out, _) = strong_malicious_corrupt(&s, NoiseRate::zero(), &FlipEligible, &mut rng(6)).unwrap();
        assert_eq!(out, s);
        let (out, l) = strong_malicious_corrupt(&s, eta(0.5), &CopyClean, &mut rng(6)).unwrap();
        assert_eq!(out, s);
        assert!(l.budget > 0);

        let one = Sample::from_vec(vec![LabeledExample::new(0, Label::Pos); 2]);
        let strat = ContradictPairs { point: DomainPoint(0) };
        let (out, _) = strong_malicious_with(&one, vec![0, 1], &strat, &mut rng(7)).unwrap();
        assert!(out.iter().any(|e| e.label == Label::Pos));
        assert!(out.iter().any(|e| e.label == Label::Neg));
    }

    struct Outside;
    impl StrongMaliciousStrategy for Outside {
        fn corrupt(&self, clean: &Sample, _: &[usize], _: &mut SimRng) -> StrategyOutcome {
            StrategyOutcome::new(vec![Corruption { index: clean.len() - 1, replacement: clean[0] }])
        }
    }

    #[test]
    fn strong_malicious_rejects_writes_outside_z() {
        let s = clean_sample(10, 8);
        let r = strong_malicious_with(&s, vec![0, 1], &Outside, &mut rng(9));
        assert!(matches!(r, Err(Error::ProtocolViolation(_))));
    }

    #[test]
    fn nasty_examples() {
        let s = clean_sample(100, 10);
        let (out, l) = nasty_corrupt(&s, NoiseRate::zero(), &FlipFirst, &mut rng(11)).unwrap();
        assert_eq!(out, s);
        assert_eq!(l.budget, 0);
        let (out, l) = nasty_corrupt(&s, eta(0.5), &Passive, &mut rng(11)).unwrap();
        assert_eq!(out, s);
        assert!(l.allowance > 0);
        assert_eq!(l.budget, 0);
    }

    #[test]
    fn nasty_flip_first_mean() {
        // 200 trials of Bin(10^4, 0.1): the mean has sd sqrt(900 / 200).
        let s = clean_sample(10_000, 12);
        let mut r = rng(13);
        let total: usize = (0..200).map(|_| nasty_corrupt(&s, eta(0.1), &FlipFirst, &mut r).unwrap().1.budget).sum();
        let mean = total as f64 / 200.0;
        assert!((mean - 1000.0).abs() <= 4.0 * (900.0f64 / 200.0).sqrt());
    }

    struct Greedy;
    impl NastyStrategy for Greedy {
        fn corrupt(&self, clean: &Sample, budget: usize, _: &mut SimRng) -> StrategyOutcome {
            StrategyOutcome::new(
                (0..(budget + 1).min(clean.len())).map(|i| Corruption { index: i, replacement: clean[i] }).collect(),
            )
        }
    }

    #[test]
    fn nasty_rejects_overspending() {
        let s = clean_sample(50, 14);
        assert!(matches!(nasty_with_budget(&s, 3, &Greedy, &mut rng(15)), Err(Error::ProtocolViolation(_))));
    }

    #[test]
    fn fixed_rate_examples() {
        let s = clean_sample(4, 16);
        let (_, l) = fixed_rate_nasty_corrupt(&s, eta(0.2), &FlipFirst, &mut rng(17)).unwrap();
        assert_eq!(l.budget, 0);
        let (_, l) = fixed_rate_nasty_corrupt(&s, eta(0.5), &FlipFirst, &mut rng(17)).unwrap();
        assert_eq!(l.budget, 2);
        let s = clean_sample(10, 18);
        let (_, l) = fixed_rate_nasty_corrupt(&s, eta(0.3), &FlipFirst, &mut rng(19)).unwrap();
        assert_eq!(l.corrupted_indices, vec![0, 1, 2]);
        assert!(matches!(
            fixed_rate_nasty_corrupt(&s, eta(0.3), &Passive, &mut rng(19)),
            Err(Error::ProtocolViolation(_))
        ));
        assert_eq!(eta(0.29).floor_of(100), 29);
    }

    #[test]
    fn huber_extremes() {
        let d = DiscreteDistribution::uniform(4).unwrap();
        let c = concept();
        let o = DiscreteDistribution::point_mass(LabeledExample::new(3, Label::Pos).labeled_index(), 8).unwrap();
        let s = huber_sample(&d, &c, NoiseRate::zero(), &o, 100, &mut rng(20)).unwrap();
        assert!(s.iter().all(|e| c.label(e.point) == e.label));
        let s = huber_sample(&d, &c, eta(1.0), &o, 100, &mut rng(20)).unwrap();
        assert!(s.iter().all(|e| *e == LabeledExample::new(3, Label::Pos)));
    }

    #[test]
    fn huber_outlier_frequency() {
        // Outlier (x0, -c(x0)) never occurs cleanly, so its rate is exactly eta.
        let d = DiscreteDistribution::uniform(4).unwrap();
        let c = concept();
        let bad = LabeledExample::new(0, Label::Neg);
        let o = DiscreteDistribution::point_mass(bad.labeled_index(), 8).unwrap();
        let dc = DiscreteDistribution::clean_labeled(&d, &c).unwrap();
        let law = huber_marginal(&dc, eta(0.2), &o).unwrap();
        assert!((law[bad.labeled_index()] - 0.2).abs() < 1e-15);
        let s = huber_sample(&d, &c, eta(0.2), &o, 10_000, &mut rng(21)).unwrap();
        let k = s.iter().filter(|e| **e == bad).count();
        assert!(within_sigmas(k as f64, 10_000, 0.2, 4.0));
    }

    #[test]
    fn tv_examples() {
        let p = DiscreteDistribution::from_weights(vec![0.5, 0.5]).unwrap();
        let q = DiscreteDistribution::from_weights(vec![0.75, 0.25]).unwrap();
        assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        assert_eq!(tv_distance(&p, &q).unwrap(), 0.25);
        let a = DiscreteDistribution::point_mass(0, 2).unwrap();
        let b = DiscreteDistribution::point_mass(1, 2).unwrap();
        assert_eq!(tv_distance(&a, &b).unwrap(), 1.0);
        assert!(tv_corrupt(&a, eta(1.0), b.clone()).is_ok());
        assert!(tv_corrupt(&p, NoiseRate::zero(), p.clone()).is_ok());

        let moved = MassTransfer::from(&p).remove(1, 0.25).unwrap().add(0, 0.25).unwrap().build().unwrap();
        assert!(tv_corrupt(&p, eta(0.25), moved.clone()).is_ok());
        assert!(matches!(tv_corrupt(&p, eta(0.2), moved), Err(Error::TvBudgetExceeded { .. })));
    }

    #[test]
    fn tracking_makes_exact_count() {
        let s = clean_sample(20, 22);
        let t = TrackStandard { standard: &FlipFirst, standard_budget: 3 };
        let out = t.corrupt(&s, 5, &mut rng(23));
        assert_eq!(out.corruptions.len(), 5);
        let t = TrackStandard { standard: &FlipFirst, standard_budget: 9 };
        assert_eq!(t.corrupt(&s, 5, &mut rng(23)).corruptions.len(), 5);
    }

    #[test]
    fn constant_concept_is_concept() {
        let c = ConstantConcept { domain_size: 3, label: Label::Pos };
        assert_eq!(c.label(DomainPoint(2)), Label::Pos);
    }
}
