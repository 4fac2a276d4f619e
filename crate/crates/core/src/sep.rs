//! A concept class learnable under strong malicious noise but not under
//! nasty noise at a comparable rate.
//!
//! The domain is `0..key_size + 2^d`. The first `key_size = w * block_size`
//! points form the key side, cut into `w` consecutive blocks; the rest is the
//! value side, with point `key_size + i` standing for the `d`-bit string `i`.
//! Concept `c_{p,q}` labels block `j` by bit `j` of the `p`-th low-weight
//! codeword `W_p`, and value point `i` by `f_k(i)` with `k = Ext(W_p, q)`.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codes::{
    erasure_list_decode, gen_random_code, low_weight_codewords, CodeParams, Codeword, GeneratorMatrix, ReceivedWord,
};
use crate::cryptoprim::{extract, prf_eval, ExtractorSpec, PrfKey};
use crate::domain::{Concept, DomainPoint, Hypothesis, Label, LabeledExample, Sample};
use crate::error::{Error, Result};
use crate::learn::{argmin_first, Learner};
use crate::noise::{Corruption, NastyStrategy, StrategyOutcome, StrongMaliciousStrategy};
use crate::rng::SimRng;
use crate::stats::binary_entropy;

/// Multiplicative slack applied to asymptotic inequalities.
pub const SLACK: f64 = 1.25;

const FAMILY_ATTEMPTS: usize = 100;

/// Parameters of the separation construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SepParams {
    pub eta_n: f64,
    pub eta_m: f64,
    /// Requested key-side mass; the realized mass is [`SepParams::kappa`].
    pub kappa_target: f64,
    /// Number of key blocks, the code length.
    pub w: usize,
    /// Message bits of the code.
    pub message_bits: usize,
    /// Value side has `2^d` points.
    pub d: usize,
    /// Extractor seed bits.
    pub u: usize,
    /// PRF key bits, the extractor output length.
    pub ell: usize,
    pub n: usize,
    pub block_size: usize,
    pub list_cap: usize,
}

impl SepParams {
    /// Explicit parameters; the block size is rounded so the key side has
    /// mass close to `kappa`.
    #[allow(clippy::too_many_arguments)]
    pub fn explicit(
        eta_n: f64,
        eta_m: f64,
        kappa: f64,
        w: usize,
        message_bits: usize,
        d: usize,
        u: usize,
        n: usize,
    ) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::InvalidParameter(format!("kappa = {kappa}")));
        }
        if d == 0 || d > 24 {
            return Err(Error::InvalidParameter(format!("value dimension {d} outside 1..=24")));
        }
        let value = (1usize << d) as f64;
        let block_size = ((value * kappa / (1.0 - kappa)) / w.max(1) as f64).round().max(1.0) as usize;
        let p = Self {
            eta_n,
            eta_m,
            kappa_target: kappa,
            w,
            message_bits,
            d,
            u,
            ell: (w / 2).max(1),
            n,
            block_size,
            list_cap: 1024,
        };
        p.validate()?;
        Ok(p)
    }

    /// Derives the noise rates, code rate and key mass from the ratio `r`:
    /// `eta_n = 2^(-8r)`, `eta_m = H/(H + 2)` and
    /// `kappa = 0.998 eta_m / ((1 - eta_m) tau) + 0.002`.
    pub fn from_ratio(r: f64, w: usize, d: usize, u: usize, n: usize) -> Result<Self> {
        if !(r > 1.0) {
            return Err(Error::InvalidParameter(format!("ratio {r} must exceed 1")));
        }
        let eta_n = 2f64.powf(-8.0 * r);
        let h = binary_entropy(eta_n);
        let eta_m = h / (h + 2.0);
        let code = CodeParams::derive(eta_n, eta_m)?;
        let q = eta_m / (1.0 - eta_m);
        let kappa = 0.998 * q / code.tau + 0.002;
        if !(q / code.tau < kappa && kappa < 1.0) {
            return Err(Error::InvalidParameter(format!("derived kappa {kappa} out of range")));
        }
        let k = ((code.rho * w as f64).round() as usize).clamp(1, w);
        Self::explicit(eta_n, eta_m, kappa, w, k, d, u, n)
    }

    /// Smallest `n` with `Delta <= (1 - 1/SLACK) D`.
    pub fn auto_n(w: usize, kappa: f64, eta_m: f64) -> usize {
        let ratio = w as f64 / ((1.0 - 1.0 / SLACK) * (1.0 - eta_m) * kappa);
        let mut n = ratio.powf(1.0 / 0.49).ceil() as usize;
        while (n as f64).powf(0.51) > (1.0 - 1.0 / SLACK) * (1.0 - eta_m) * kappa * n as f64 / w as f64 {
            n += 1;
        }
        n
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.eta_n && self.eta_n < 1.0 && 0.0 <= self.eta_m && self.eta_m < 1.0) {
            return Err(Error::InvalidParameter("noise rates outside (0, 1)".into()));
        }
        if self.w == 0 || self.w > 64 || self.message_bits == 0 || self.message_bits > self.w.min(24) {
            return Err(Error::InvalidParameter(format!("[{}, {}] code unsupported", self.w, self.message_bits)));
        }
        if self.u > crate::cryptoprim::MAX_SEED_BITS || self.ell == 0 || self.ell > self.w {
            return Err(Error::InvalidParameter("extractor lengths unsupported".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        Ok(())
    }

    pub fn key_size(&self) -> usize {
        self.w * self.block_size
    }

    pub fn value_size(&self) -> usize {
        1 << self.d
    }

    pub fn domain_size(&self) -> usize {
        self.key_size() + self.value_size()
    }

    /// Realized key-side mass under the uniform distribution.
    pub fn kappa(&self) -> f64 {
        self.key_size() as f64 / self.domain_size() as f64
    }

    /// Probability that a uniform point lands in a given block.
    pub fn block_mass(&self) -> f64 {
        self.block_size as f64 / self.domain_size() as f64
    }

    /// Expected clean count per block, `(1 - eta_m) kappa n / w`.
    pub fn expected_block_count(&self) -> f64 {
        (1.0 - self.eta_m) * self.kappa() * self.n as f64 / self.w as f64
    }

    /// `Delta = n^0.51`.
    pub fn delta(&self) -> f64 {
        (self.n as f64).powf(0.51)
    }

    /// The count threshold `D - Delta`.
    pub fn threshold(&self) -> f64 {
        self.expected_block_count() - self.delta()
    }

    /// Largest weight of a codeword indexing a concept.
    pub fn weight_bound(&self) -> usize {
        (self.eta_n * self.w as f64 + 1e-9).floor() as usize
    }

    /// Allowed number of `?` coordinates, `SLACK eta_m / (kappa (1 - eta_m)) w`.
    pub fn erasure_allowance(&self) -> f64 {
        SLACK * self.eta_m / (self.kappa() * (1.0 - self.eta_m)) * self.w as f64
    }

    pub fn block_of(&self, x: DomainPoint) -> Option<usize> {
        (x.0 < self.key_size()).then(|| x.0 / self.block_size)
    }

    pub fn value_index(&self, x: DomainPoint) -> Option<u64> {
        (x.0 >= self.key_size() && x.0 < self.domain_size()).then(|| (x.0 - self.key_size()) as u64)
    }

    pub fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        j * self.block_size..(j + 1) * self.block_size
    }

    pub fn extractor(&self) -> Result<ExtractorSpec> {
        ExtractorSpec::new(self.w, self.u, self.ell)
    }
}

/// A code and its low-weight codewords, shared by all concepts of one class.
#[derive(Debug)]
pub struct SepFamily {
    pub params: SepParams,
    pub code: GeneratorMatrix,
    pub extractor: ExtractorSpec,
    low_weight: Vec<Codeword>,
    index: HashMap<u64, usize>,
}

impl SepFamily {
    /// Draws a random code with at least two low-weight codewords.
    pub fn generate(params: SepParams, rng: &mut SimRng) -> Result<Arc<Self>> {
        params.validate()?;
        for _ in 0..FAMILY_ATTEMPTS {
            let code = gen_random_code(params.message_bits, params.w, rng)?;
            let family = Self::with_code(params.clone(), code)?;
            if family.low_weight.len() >= 2 {
                return Ok(Arc::new(family));
            }
        }
        Err(Error::InvalidParameter("no code with two low-weight codewords found".into()))
    }

    pub fn with_code(params: SepParams, code: GeneratorMatrix) -> Result<Self> {
        if code.width() != params.w || code.message_bits() != params.message_bits {
            return Err(Error::InvalidParameter("code shape differs from parameters".into()));
        }
        let low_weight = low_weight_codewords(&code, params.weight_bound())?;
        let index = low_weight.iter().enumerate().map(|(p, c)| (c.bits, p)).collect();
        let extractor = params.extractor()?;
        Ok(Self { params, code, extractor, low_weight, index })
    }

    /// `W_p` for every `p`, in order.
    pub fn low_weight(&self) -> &[Codeword] {
        &self.low_weight
    }

    pub fn index_of(&self, c: &Codeword) -> Option<usize> {
        self.index.get(&c.bits).copied()
    }

    pub fn prf_key(&self, p: usize, q: u64) -> Result<PrfKey> {
        let w = self.low_weight.get(p).ok_or(Error::PointOutOfRange { point: p, size: self.low_weight.len() })?;
        PrfKey::from_u64(extract(w.bits, q, &self.extractor)?, self.params.ell)
    }

    pub fn concept(self: &Arc<Self>, p: usize, q: u64) -> Result<SepConcept> {
        Ok(SepConcept { family: self.clone(), p, q, key: self.prf_key(p, q)? })
    }

    /// A uniformly random concept of the class.
    pub fn random_concept(self: &Arc<Self>, rng: &mut SimRng) -> Result<SepConcept> {
        let p = rng.gen_range(0..self.low_weight.len());
        let q = rng.gen_range(0..self.extractor.seed_count());
        self.concept(p, q)
    }
}

/// The concept `c_{p,q}`.
#[derive(Clone, Debug)]
pub struct SepConcept {
    family: Arc<SepFamily>,
    pub p: usize,
    pub q: u64,
    key: PrfKey,
}

impl SepConcept {
    pub fn family(&self) -> &Arc<SepFamily> {
        &self.family
    }

    pub fn codeword(&self) -> Codeword {
        self.family.low_weight[self.p]
    }

    pub fn key(&self) -> &PrfKey {
        &self.key
    }
}

impl Concept for SepConcept {
    fn domain_size(&self) -> usize {
        self.family.params.domain_size()
    }

    fn label(&self, x: DomainPoint) -> Label {
        sep_concept_eval(self, x)
    }
}

/// Key side: bit `j(x)` of `W_p`. Value side: `f_{Ext(W_p, q)}(x')`.
pub fn sep_concept_eval(c: &SepConcept, x: DomainPoint) -> Label {
    let params = &c.family.params;
    match params.block_of(x) {
        Some(j) => c.codeword().symbol(j),
        None => prf_eval(&c.key, params.value_index(x).expect("point in domain")),
    }
}

/// Nasty adversary flipping every example in each `-1` block to `+1`, in
/// block order, until the budget runs out.
#[derive(Clone, Debug)]
pub struct SepNastyStrategy {
    pub concept: SepConcept,
}

impl NastyStrategy for SepNastyStrategy {
    fn corrupt(&self, clean: &Sample, budget: usize, _: &mut SimRng) -> StrategyOutcome {
        sep_nasty_strategy(clean, &self.concept, budget)
    }
}

pub fn sep_nasty_strategy(clean: &Sample, c: &SepConcept, budget: usize) -> StrategyOutcome {
    let params = &c.family.params;
    let w = c.codeword();
    let mut by_block: Vec<Vec<usize>> = vec![Vec::new(); params.w];
    for (i, e) in clean.iter().enumerate() {
        if let Some(j) = params.block_of(e.point) {
            by_block[j].push(i);
        }
    }
    let mut out = StrategyOutcome::default();
    'blocks: for (j, members) in by_block.iter().enumerate() {
        if w.symbol(j) == Label::Pos {
            continue;
        }
        for &i in members {
            if out.corruptions.len() == budget {
                out.exhausted = true;
                break 'blocks;
            }
            out.corruptions.push(Corruption { index: i, replacement: LabeledExample { label: Label::Pos, ..clean[i] } });
        }
    }
    out
}

/// Strong malicious adversary that erases key blocks: for each block in turn
/// it writes `threshold` examples with the wrong label, so both label counts
/// reach the learner's threshold and the block decodes to `?`.
#[derive(Clone, Debug)]
pub struct KeyErasureAdversary {
    pub concept: SepConcept,
    /// Wrong-label examples planted per erased block.
    pub per_block: usize,
}

impl KeyErasureAdversary {
    pub fn new(concept: SepConcept) -> Self {
        let per_block = concept.family.params.threshold().ceil().max(1.0) as usize;
        Self { concept, per_block }
    }
}

impl StrongMaliciousStrategy for KeyErasureAdversary {
    fn corrupt(&self, _: &Sample, eligible: &[usize], rng: &mut SimRng) -> StrategyOutcome {
        let params = &self.concept.family.params;
        let w = self.concept.codeword();
        let mut out = StrategyOutcome::default();
        let mut slots = eligible.iter();
        for j in 0..params.w {
            if eligible.len() - out.corruptions.len() < self.per_block {
                break;
            }
            let range = params.block_range(j);
            for _ in 0..self.per_block {
                let &i = slots.next().expect("enough slots");
                let x = rng.gen_range(range.clone());
                out.corruptions.push(Corruption { index: i, replacement: LabeledExample::new(x, w.symbol(j).flip()) });
            }
        }
        out
    }
}

/// Diagnostics from one run of [`SepLearner`].
#[derive(Clone, Debug)]
pub struct SepLearnOutcome {
    /// Per-block guesses; `None` is an erasure.
    pub z: Vec<Option<Label>>,
    /// Indices `p` surviving decoding and the low-weight filter.
    pub candidates: Vec<usize>,
    pub p: usize,
    pub q: u64,
    pub empirical_error: f64,
    pub hypothesis: Hypothesis,
}

/// The erasure-list-decoding learner for strong malicious noise.
#[derive(Clone, Debug)]
pub struct SepLearner {
    pub family: Arc<SepFamily>,
}

impl SepLearner {
    pub fn new(family: Arc<SepFamily>) -> Self {
        Self { family }
    }

    /// Step 1: `z_i = b` when `s_i^{-b} < D - Delta <= s_i^{b}`, else `?`.
    pub fn key_guesses(&self, s: &Sample) -> Vec<Option<Label>> {
        let params = &self.family.params;
        let counts = block_counts(params, s);
        let t = params.threshold();
        counts
            .iter()
            .map(|&[neg, pos]| {
                let (neg, pos) = (neg as f64, pos as f64);
                if neg < t && t <= pos {
                    Some(Label::Pos)
                } else if pos < t && t <= neg {
                    Some(Label::Neg)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn run(&self, s: &Sample) -> Result<SepLearnOutcome> {
        let fam = &self.family;
        let params = &fam.params;
        if s.len() != params.n {
            return Err(Error::SampleLength { expected: params.n, found: s.len() });
        }
        let z = self.key_guesses(s);
        let received = ReceivedWord::from_symbols(&z)?;
        let messages = match erasure_list_decode(&fam.code, &received, params.list_cap) {
            Ok(m) => m,
            Err(e @ Error::ListTooLarge { .. }) => return Err(Error::LearningFailure(e.to_string())),
            Err(e) => return Err(e),
        };
        let mut candidates: Vec<usize> =
            messages.iter().filter_map(|&m| fam.index_of(&fam.code.encode(m).ok()?)).collect();
        candidates.sort_unstable();
        if candidates.is_empty() {
            return Err(Error::LearningFailure("no low-weight codeword is consistent with the key side".into()));
        }

        let counts = block_counts(params, s);
        let mut value_counts = vec![[0u32; 2]; params.value_size()];
        for e in s {
            if let Some(v) = params.value_index(e.point) {
                value_counts[v as usize][e.label as usize] += 1;
            }
        }
        let occupied: Vec<usize> = (0..value_counts.len()).filter(|&v| value_counts[v] != [0, 0]).collect();

        let mut pairs = Vec::new();
        let mut errors = Vec::new();
        for &p in &candidates {
            let word = fam.low_weight[p];
            let key_err: u64 = (0..params.w).map(|j| counts[j][word.symbol(j).flip() as usize]).sum();
            for q in 0..fam.extractor.seed_count() {
                let key = fam.prf_key(p, q)?;
                let value_err: u64 = occupied
                    .iter()
                    .map(|&v| value_counts[v][prf_eval(&key, v as u64).flip() as usize] as u64)
                    .sum();
                pairs.push((p, q));
                errors.push((key_err + value_err) as f64 / s.len() as f64);
            }
        }
        let best = argmin_first(&errors).expect("at least one candidate");
        let (p, q) = pairs[best];
        let concept = fam.concept(p, q)?;
        Ok(SepLearnOutcome {
            z,
            candidates,
            p,
            q,
            empirical_error: errors[best],
            hypothesis: Hypothesis::deterministic(concept),
        })
    }
}

impl Learner for SepLearner {
    fn sample_size(&self) -> usize {
        self.family.params.n
    }

    fn learn(&self, s: &Sample, _: &mut SimRng) -> Result<Hypothesis> {
        Ok(self.run(s)?.hypothesis)
    }
}

/// `[count of -1, count of +1]` per block.
fn block_counts(params: &SepParams, s: &Sample) -> Vec<[u64; 2]> {
    let mut counts = vec![[0u64; 2]; params.w];
    for e in s {
        if let Some(j) = params.block_of(e.point) {
            counts[j][e.label as usize] += 1;
        }
    }
    counts
}

/// Rebuilds a nasty-corrupted sample from value-side examples alone.
///
/// Each position independently lands in block `j` with that block's mass, or
/// on the value side otherwise. Value-side positions take the next example of
/// `t_value`; block positions become a uniform point of the block labeled `+1`.
pub fn sep_simulate_t_nasty(t_value: &Sample, params: &SepParams, rng: &mut SimRng) -> Result<Sample> {
    let mut fresh = t_value.iter();
    let key = params.key_size();
    let domain = params.domain_size();
    (0..params.n)
        .map(|_| {
            // A uniform domain point carries exactly the block/value law.
            let x = rng.gen_range(0..domain);
            if x < key {
                let j = x / params.block_size;
                let range = params.block_range(j);
                Ok(LabeledExample::new(rng.gen_range(range), Label::Pos))
            } else {
                fresh.next().copied().ok_or(Error::Exhausted("value-side examples"))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{draw_clean_sample, error_rate, DiscreteDistribution, TableConcept};
    use crate::noise::{nasty_corrupt, strong_malicious_corrupt, NoiseRate};
    use crate::rng::RngHandle;

    fn small_params(n: usize) -> SepParams {
        SepParams::explicit(0.25, 0.05, 0.5, 12, 6, 8, 4, n).unwrap()
    }

    fn family(n: usize, seed: u64) -> Arc<SepFamily> {
        SepFamily::generate(small_params(n), &mut RngHandle::from_seed(seed).rng()).unwrap()
    }

    #[test]
    fn layout() {
        let p = small_params(100);
        assert_eq!(p.block_size, (256.0f64 / 12.0).round() as usize);
        assert_eq!(p.domain_size(), 12 * 21 + 256);
        assert_eq!(p.block_of(DomainPoint(0)), Some(0));
        assert_eq!(p.block_of(DomainPoint(21)), Some(1));
        assert_eq!(p.block_of(DomainPoint(p.key_size())), None);
        assert_eq!(p.value_index(DomainPoint(p.key_size() + 5)), Some(5));
    }

    #[test]
    fn concept_examples() {
        let fam = family(100, 1);
        let c = fam.concept(0, 3).unwrap();
        for j in 0..fam.params.w {
            let labels: Vec<Label> = fam.params.block_range(j).map(|x| c.label(DomainPoint(x))).collect();
            assert!(labels.iter().all(|&l| l == labels[0]));
        }
        let zero = fam.low_weight().iter().position(|w| w.weight() == 0).unwrap();
        let c0 = fam.concept(zero, 0).unwrap();
        assert!((0..fam.params.key_size()).all(|x| c0.label(DomainPoint(x)) == Label::Pos));
        let x = DomainPoint(fam.params.key_size() + 17);
        assert_eq!(c.label(x), c.label(x));
    }

    #[test]
    fn low_weight_list_is_sorted_and_bounded() {
        let fam = family(100, 2);
        assert!(fam.low_weight().iter().all(|c| c.weight() <= fam.params.weight_bound()));
        for p in 0..fam.low_weight().len() {
            assert_eq!(fam.index_of(&fam.low_weight()[p]), Some(p));
        }
    }

    #[test]
    fn nasty_strategy_examples() {
        let fam = family(100, 3);
        let zero = fam.low_weight().iter().position(|w| w.weight() == 0).unwrap();
        let c0 = fam.concept(zero, 0).unwrap();
        let s = draw_clean_sample(&DiscreteDistribution::uniform(fam.params.domain_size()).unwrap(), &c0, 300, &mut RngHandle::from_seed(4).rng()).unwrap();
        assert!(sep_nasty_strategy(&s, &c0, 1000).corruptions.is_empty());

        let heavy = fam.low_weight().iter().position(|w| w.weight() > 0).unwrap();
        let c = fam.concept(heavy, 0).unwrap();
        let j = (0..fam.params.w).find(|&j| c.codeword().symbol(j) == Label::Neg).unwrap();
        let key = fam.params.key_size();
        let mut ex: Vec<LabeledExample> = (0..3).map(|t| LabeledExample::new(j * fam.params.block_size + t, Label::Neg)).collect();
        ex.push(LabeledExample::new(key, c.label(DomainPoint(key))));
        let s = Sample::from_vec(ex);
        let out = sep_nasty_strategy(&s, &c, 3);
        assert_eq!(out.corruptions.iter().map(|c| c.index).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(out.corruptions.iter().all(|c| c.replacement.label == Label::Pos));
        assert!(!out.exhausted);
        assert!(sep_nasty_strategy(&s, &c, 2).exhausted);
    }

    #[test]
    fn noiseless_learner_recovers_concept() {
        let params = SepParams::explicit(0.25, 0.05, 0.5, 12, 6, 8, 4, 20_000).unwrap();
        let fam = SepFamily::generate(params, &mut RngHandle::from_seed(5).rng()).unwrap();
        let mut rng = RngHandle::from_seed(6).rng();
        let c = fam.random_concept(&mut rng).unwrap();
        let d = DiscreteDistribution::uniform(fam.params.domain_size()).unwrap();
        let s = draw_clean_sample(&d, &c, fam.params.n, &mut rng).unwrap();
        let out = SepLearner::new(fam.clone()).run(&s).unwrap();
        assert!(out.z.iter().all(Option::is_some));
        assert_eq!(crate::codes::Codeword::from_signs(&out.z.iter().map(|z| z.unwrap()).collect::<Vec<_>>()).unwrap(), c.codeword());
        assert_eq!(error_rate(&out.hypothesis, &c, &d).unwrap(), 0.0);
        // Another seed may realize the same PRF key, so compare truth tables.
        assert_eq!(TableConcept::of(&fam.concept(out.p, out.q).unwrap()), TableConcept::of(&c));
    }

    #[test]
    fn empty_block_is_erased() {
        let fam = family(50, 7);
        let s = Sample::from_vec(vec![LabeledExample::new(fam.params.key_size(), Label::Pos); 50]);
        let z = SepLearner::new(fam).key_guesses(&s);
        assert!(z.iter().all(Option::is_none));
    }

    #[test]
    fn erasure_adversary_leaves_truth_among_candidates() {
        let params = SepParams::explicit(0.25, 0.05, 0.5, 12, 6, 8, 4, 20_000).unwrap();
        let fam = SepFamily::generate(params, &mut RngHandle::from_seed(8).rng()).unwrap();
        let d = DiscreteDistribution::uniform(fam.params.domain_size()).unwrap();
        for t in 0..10 {
            let mut rng = RngHandle::new(9, t).rng();
            let c = fam.random_concept(&mut rng).unwrap();
            let s = draw_clean_sample(&d, &c, fam.params.n, &mut rng).unwrap();
            let adv = KeyErasureAdversary::new(c.clone());
            let (s, _) = strong_malicious_corrupt(&s, NoiseRate::new(0.05).unwrap(), &adv, &mut rng).unwrap();
            let out = SepLearner::new(fam.clone()).run(&s).unwrap();
            assert!(out.candidates.contains(&c.p));
            assert!(out.z.iter().enumerate().all(|(j, z)| z.is_none_or(|l| l == c.codeword().symbol(j))));
            assert!(out.z.iter().any(Option::is_none));
        }
    }

    #[test]
    fn nasty_key_side_is_all_positive() {
        let fam = family(2_000, 10);
        let d = DiscreteDistribution::uniform(fam.params.domain_size()).unwrap();
        let mut rng = RngHandle::from_seed(11).rng();
        let c = fam.random_concept(&mut rng).unwrap();
        let s = draw_clean_sample(&d, &c, 2_000, &mut rng).unwrap();
        let (out, ledger) = nasty_corrupt(&s, NoiseRate::new(0.25).unwrap(), &SepNastyStrategy { concept: c }, &mut rng).unwrap();
        assert!(!ledger.exhausted);
        assert!(out.iter().filter(|e| fam.params.block_of(e.point).is_some()).all(|e| e.label == Label::Pos));
    }

    #[test]
    fn exhaustion_is_rare() {
        let params = SepParams::explicit(0.2, 0.05, 0.5, 12, 6, 8, 4, 10_000).unwrap();
        let fam = SepFamily::generate(params, &mut RngHandle::from_seed(12).rng()).unwrap();
        let d = DiscreteDistribution::uniform(fam.params.domain_size()).unwrap();
        let eta = NoiseRate::new(0.2).unwrap();
        let exhausted = (0..500)
            .filter(|&t| {
                let mut rng = RngHandle::new(13, t).rng();
                let c = fam.random_concept(&mut rng).unwrap();
                let s = draw_clean_sample(&d, &c, 10_000, &mut rng).unwrap();
                nasty_corrupt(&s, eta, &SepNastyStrategy { concept: c }, &mut rng).unwrap().1.exhausted
            })
            .count();
        assert!(exhausted < 5, "{exhausted} of 500 exhausted");
    }

    #[test]
    fn simulation_examples() {
        let fam = family(40, 14);
        let c = fam.concept(0, 0).unwrap();
        let key = fam.params.key_size();
        let t_value: Sample = (0..40).map(|i| LabeledExample::new(key + i, c.label(DomainPoint(key + i)))).collect();
        let sim = sep_simulate_t_nasty(&t_value, &fam.params, &mut RngHandle::from_seed(15).rng()).unwrap();
        assert_eq!(sim.len(), 40);
        let value: Vec<LabeledExample> = sim.iter().filter(|e| e.point.0 >= key).copied().collect();
        assert_eq!(value, t_value.as_slice()[..value.len()].to_vec());
        assert!(sim.iter().filter(|e| e.point.0 < key).all(|e| e.label == Label::Pos));
        assert!(sep_simulate_t_nasty(&Sample::new(), &fam.params, &mut RngHandle::from_seed(15).rng()).is_err());
    }

    #[test]
    fn ratio_pack_and_auto_n() {
        let p = SepParams::from_ratio(1.05, 24, 12, 8, 1000).unwrap();
        assert!((p.eta_n - 2f64.powf(-8.4)).abs() < 1e-15);
        let h = binary_entropy(p.eta_n);
        assert!((p.eta_m - h / (h + 2.0)).abs() < 1e-15);
        let n = SepParams::auto_n(24, 0.5, 0.05);
        let d = 0.95 * 0.5 * n as f64 / 24.0;
        assert!((n as f64).powf(0.51) <= 0.2 * d);
        assert!(((n - 1) as f64).powf(0.51) > 0.2 * 0.95 * 0.5 * (n - 1) as f64 / 24.0);
    }
}
