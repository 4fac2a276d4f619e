//! A concept class where ignoring contradictory examples costs a factor of
//! two in the tolerable noise rate, the randomized-rounding learner for it,
//! and the coupling that turns a nasty adversary into a strong malicious one.
//!
//! The domain is `0..key_size + 2^d`, laid out as in [`crate::sep`]: `w` key
//! blocks followed by the value side. Concept `c_k` labels block `j` by bit
//! `j` of `Enc(k)` and value point `i` by `f_k(i)`.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codes::{bitflip_list_decode, gen_random_code, Codeword, GeneratorMatrix};
use crate::cryptoprim::{prf_eval, PrfKey};
use crate::domain::{Concept, DomainPoint, Hypothesis, Label, LabeledExample, Sample};
use crate::error::{Error, Result};
use crate::learn::{argmin_first, ice_filter, ice_filter_indices, multiset, Learner};
use crate::noise::{
    nasty_with_budget, strong_malicious_with, Corruption, CorruptionLedger, NastyStrategy, StrategyOutcome,
    StrongMaliciousStrategy,
};
use crate::rng::SimRng;

/// Samples per block-and-noise unit in the default sample size `50 w / eta`.
pub const DEFAULT_N_FACTOR: f64 = 50.0;

/// Parameters of the construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IceSepParams {
    pub eta: f64,
    pub kappa: f64,
    /// Code length and number of key blocks.
    pub w: usize,
    /// Message bits, PRF key bits and value-side dimension.
    pub d: usize,
    pub n: usize,
    pub block_size: usize,
    pub list_cap: usize,
}

impl IceSepParams {
    /// Block size is rounded so the key side has mass close to `2 kappa' eta`.
    pub fn new(eta: f64, kappa: f64, w: usize, d: usize, n: usize) -> Result<Self> {
        if !(eta > 0.0 && eta <= 0.1) {
            return Err(Error::InvalidParameter(format!("eta = {eta} outside (0, 0.1]")));
        }
        if !(kappa > 0.5 && kappa < 1.0) {
            return Err(Error::InvalidParameter(format!("kappa = {kappa} outside (1/2, 1)")));
        }
        if d == 0 || d > 24 || w < d || w > 64 {
            return Err(Error::InvalidParameter(format!("[{w}, {d}] code unsupported")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        let mass = (kappa + 0.5) * eta;
        let block_size = (((1usize << d) as f64 * mass / (1.0 - mass)) / w as f64).round().max(1.0) as usize;
        Ok(Self { eta, kappa, w, d, n, block_size, list_cap: 1024 })
    }

    /// [`IceSepParams::new`] with `n = ceil(50 w / eta)`.
    pub fn with_default_n(eta: f64, kappa: f64, w: usize, d: usize) -> Result<Self> {
        Self::new(eta, kappa, w, d, (DEFAULT_N_FACTOR * w as f64 / eta).ceil() as usize)
    }

    /// `kappa' = (kappa + 1/2) / 2`.
    pub fn kappa_prime(&self) -> f64 {
        (self.kappa + 0.5) / 2.0
    }

    /// `tau = (kappa - 1/2) / 8`.
    pub fn tau(&self) -> f64 {
        (self.kappa - 0.5) / 8.0
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

    /// Realized key-side mass; the target is `2 kappa' eta`.
    pub fn key_mass(&self) -> f64 {
        self.key_size() as f64 / self.domain_size() as f64
    }

    /// Expected clean count per block, `key_mass n / w`.
    pub fn r(&self) -> f64 {
        self.block_size as f64 * self.n as f64 / self.domain_size() as f64
    }

    /// `Delta = n^0.51`.
    pub fn delta(&self) -> f64 {
        (self.n as f64).powf(0.51)
    }

    /// Bit-flip decoding radius `floor((1/2 - tau) w)`.
    pub fn radius(&self) -> usize {
        ((0.5 - self.tau()) * self.w as f64 + 1e-9).floor() as usize
    }

    /// The bound `(1 - 4 tau) w` on `||v - Enc(k)||_1`.
    pub fn l1_bound(&self) -> f64 {
        (1.0 - 4.0 * self.tau()) * self.w as f64
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
}

/// The code shared by all concepts of one class.
#[derive(Debug)]
pub struct IceFamily {
    pub params: IceSepParams,
    pub code: GeneratorMatrix,
}

impl IceFamily {
    pub fn generate(params: IceSepParams, rng: &mut SimRng) -> Result<Arc<Self>> {
        let code = gen_random_code(params.d, params.w, rng)?;
        Self::with_code(params, code)
    }

    pub fn with_code(params: IceSepParams, code: GeneratorMatrix) -> Result<Arc<Self>> {
        if code.width() != params.w || code.message_bits() != params.d {
            return Err(Error::InvalidParameter("code shape differs from parameters".into()));
        }
        Ok(Arc::new(Self { params, code }))
    }

    pub fn concept(self: &Arc<Self>, message: u64) -> Result<IceConcept> {
        let codeword = self.code.encode(message)?;
        let key = PrfKey::from_u64(message, self.params.d)?;
        Ok(IceConcept { family: self.clone(), message, codeword, key })
    }

    pub fn random_concept(self: &Arc<Self>, rng: &mut SimRng) -> Result<IceConcept> {
        self.concept(rng.gen_range(0..1u64 << self.params.d))
    }
}

/// The concept `c_k`.
#[derive(Clone, Debug)]
pub struct IceConcept {
    family: Arc<IceFamily>,
    pub message: u64,
    codeword: Codeword,
    key: PrfKey,
}

impl IceConcept {
    pub fn family(&self) -> &Arc<IceFamily> {
        &self.family
    }

    pub fn codeword(&self) -> Codeword {
        self.codeword
    }

    pub fn key(&self) -> &PrfKey {
        &self.key
    }
}

impl Concept for IceConcept {
    fn domain_size(&self) -> usize {
        self.family.params.domain_size()
    }

    fn label(&self, x: DomainPoint) -> Label {
        ice_concept_eval(self, x)
    }
}

/// Key side: bit `j(x)` of `Enc(k)`. Value side: `f_k(x')`.
pub fn ice_concept_eval(c: &IceConcept, x: DomainPoint) -> Label {
    let params = &c.family.params;
    match params.block_of(x) {
        Some(j) => c.codeword.symbol(j),
        None => prf_eval(&c.key, params.value_index(x).expect("point in domain")),
    }
}

/// `(n_{+1} - n_{-1}) / (R (1 - eta))` over the examples of one block.
pub fn key_bit_guess(block: &Sample, r: f64, eta: f64) -> Result<f64> {
    let scale = r * (1.0 - eta);
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!("R (1 - eta) = {scale}")));
    }
    let net: i64 = block.iter().map(|e| e.label.sign() as i64).sum();
    Ok(net as f64 / scale)
}

/// Rounds each coordinate to `+1` with probability `(1 + v) / 2`, or to its
/// sign when `|v| > 1`.
pub fn round_vector(v: &[f64], rng: &mut SimRng) -> Vec<Label> {
    v.iter()
        .map(|&vi| {
            if vi > 1.0 {
                Label::Pos
            } else if vi < -1.0 {
                Label::Neg
            } else if rng.gen::<f64>() < (1.0 + vi) / 2.0 {
                Label::Pos
            } else {
                Label::Neg
            }
        })
        .collect()
}

/// `sum_i |v_i - u_i|`.
pub fn l1_distance(v: &[f64], u: &Codeword) -> f64 {
    v.iter().enumerate().map(|(i, &vi)| (vi - u.symbol(i).sign() as f64).abs()).sum()
}

/// Diagnostics from one run of [`IceLearner`].
#[derive(Clone, Debug)]
pub struct IceLearnOutcome {
    /// Size of the sample after ICE.
    pub survivors: usize,
    pub v: Vec<f64>,
    pub z: Codeword,
    pub candidates: Vec<u64>,
    pub message: u64,
    pub empirical_error: f64,
    pub hypothesis: Hypothesis,
}

/// The ICE learner: filter, guess key bits, round, list-decode, test.
#[derive(Clone, Debug)]
pub struct IceLearner {
    pub family: Arc<IceFamily>,
}

impl IceLearner {
    pub fn new(family: Arc<IceFamily>) -> Self {
        Self { family }
    }

    /// Key-bit guesses over an already filtered sample.
    pub fn guesses(&self, s_prime: &Sample) -> Result<Vec<f64>> {
        let params = &self.family.params;
        let mut blocks = vec![Sample::new(); params.w];
        for e in s_prime {
            if let Some(j) = params.block_of(e.point) {
                blocks[j].push(*e);
            }
        }
        blocks.iter().map(|b| key_bit_guess(b, params.r(), params.eta)).collect()
    }

    pub fn run(&self, s: &Sample, rng: &mut SimRng) -> Result<IceLearnOutcome> {
        let fam = &self.family;
        let params = &fam.params;
        if s.len() != params.n {
            return Err(Error::SampleLength { expected: params.n, found: s.len() });
        }
        let s_prime = ice_filter(s);
        if s_prime.is_empty() {
            return Err(Error::LearningFailure("no examples survive ICE".into()));
        }
        let v = self.guesses(&s_prime)?;
        let z = Codeword::from_signs(&round_vector(&v, rng))?;
        let candidates = match bitflip_list_decode(&fam.code, &z, params.radius(), params.list_cap) {
            Ok(c) if c.is_empty() => return Err(Error::LearningFailure("empty decoding list".into())),
            Ok(c) => c,
            Err(e @ Error::ListTooLarge { .. }) => return Err(Error::LearningFailure(e.to_string())),
            Err(e) => return Err(e),
        };

        let mut block_counts = vec![[0u64; 2]; params.w];
        let mut value_counts: HashMap<u64, [u64; 2]> = HashMap::new();
        for e in &s_prime {
            match params.block_of(e.point) {
                Some(j) => block_counts[j][e.label as usize] += 1,
                None => value_counts.entry(params.value_index(e.point).expect("in domain")).or_default()[e.label as usize] += 1,
            }
        }
        let mut occupied: Vec<(u64, [u64; 2])> = value_counts.into_iter().collect();
        occupied.sort_unstable();

        let errors: Vec<f64> = candidates
            .iter()
            .map(|&m| {
                let word = fam.code.encode(m).expect("message in range");
                let key = PrfKey::from_u64(m, params.d).expect("short key");
                let key_err: u64 = (0..params.w).map(|j| block_counts[j][word.symbol(j).flip() as usize]).sum();
                let value_err: u64 =
                    occupied.iter().map(|(v, counts)| counts[prf_eval(&key, *v).flip() as usize]).sum();
                (key_err + value_err) as f64 / s_prime.len() as f64
            })
            .collect();
        let best = argmin_first(&errors).expect("non-empty list");
        let message = candidates[best];
        Ok(IceLearnOutcome {
            survivors: s_prime.len(),
            v,
            z,
            empirical_error: errors[best],
            hypothesis: Hypothesis::deterministic(fam.concept(message)?),
            message,
            candidates,
        })
    }
}

impl Learner for IceLearner {
    fn sample_size(&self) -> usize {
        self.family.params.n
    }

    fn learn(&self, s: &Sample, rng: &mut SimRng) -> Result<Hypothesis> {
        Ok(self.run(s, rng)?.hypothesis)
    }
}

/// Nasty adversary that turns half of every key block into contradictions of
/// the other half.
///
/// For a block holding positions `j_0 < ... < j_{s-1}`: when `s` is even,
/// `j_t` becomes `(x_{j_{t+s/2}}, -b)` for `t < s/2`; when `s` is odd, with
/// `h = ceil(s/2)`, `j_t` becomes `(x_{j_{t+h}}, -b)` for `t < floor(s/2)` and
/// `j_{h-1}` becomes a fresh uniform value-side example labeled by the
/// concept. Blocks are processed in order; the first block that does not fit
/// in the budget stops the plan and flags exhaustion.
#[derive(Clone, Debug)]
pub struct IceIdealizedAdversary {
    pub concept: IceConcept,
}

impl NastyStrategy for IceIdealizedAdversary {
    fn corrupt(&self, clean: &Sample, budget: usize, rng: &mut SimRng) -> StrategyOutcome {
        ice_idealized_nasty_strategy(clean, &self.concept, budget, rng)
    }
}

pub fn ice_idealized_nasty_strategy(
    clean: &Sample,
    c: &IceConcept,
    budget: usize,
    rng: &mut SimRng,
) -> StrategyOutcome {
    let params = &c.family.params;
    let blocks = positions_by_block(params, clean);
    let mut out = StrategyOutcome::default();
    for (j, pos) in blocks.iter().enumerate() {
        let s = pos.len();
        let h = s.div_ceil(2);
        if out.corruptions.len() + h > budget {
            out.exhausted = true;
            break;
        }
        let wrong = c.codeword.symbol(j).flip();
        for t in 0..s / 2 {
            out.corruptions.push(Corruption {
                index: pos[t],
                replacement: LabeledExample { point: clean[pos[t + h]].point, label: wrong },
            });
        }
        if s % 2 == 1 {
            let x = DomainPoint(params.key_size() + rng.gen_range(0..params.value_size()));
            out.corruptions.push(Corruption {
                index: pos[h - 1],
                replacement: LabeledExample { point: x, label: c.label(x) },
            });
        }
    }
    out
}

/// Corruptions the idealized adversary needs: `ceil(s_j / 2)` per block.
pub fn idealized_need(params: &IceSepParams, clean: &Sample) -> usize {
    positions_by_block(params, clean).iter().map(|p| p.len().div_ceil(2)).sum()
}

/// Checks the survivor pattern after the idealized adversary and ICE: no
/// key-side example survives, and what remains is exactly the untouched
/// value-side examples plus one fresh value-side example per odd block.
pub fn idealized_survivors_match(
    params: &IceSepParams,
    clean: &Sample,
    corrupted: &Sample,
    ledger: &CorruptionLedger,
) -> bool {
    let after = ice_filter(corrupted);
    if after.iter().any(|e| params.block_of(e.point).is_some()) {
        return false;
    }
    let odd_blocks = positions_by_block(params, clean).iter().filter(|p| p.len() % 2 == 1).count();
    let fresh: Vec<LabeledExample> =
        ledger.introduced.iter().copied().filter(|e| params.block_of(e.point).is_none()).collect();
    if fresh.len() != odd_blocks {
        return false;
    }
    let expected: Vec<LabeledExample> = clean
        .iter()
        .enumerate()
        .filter(|&(i, e)| params.block_of(e.point).is_none() && !ledger.is_corrupted(i))
        .map(|(_, e)| *e)
        .chain(fresh)
        .collect();
    multiset(&expected) == multiset(after.as_slice())
}

fn positions_by_block(params: &IceSepParams, s: &Sample) -> Vec<Vec<usize>> {
    let mut blocks = vec![Vec::new(); params.w];
    for (i, e) in s.iter().enumerate() {
        if let Some(j) = params.block_of(e.point) {
            blocks[j].push(i);
        }
    }
    blocks
}

/// Strong malicious adversary that spends its positions on key blocks in
/// order: first contradicting the block's surviving clean examples, then
/// writing the same number of wrong labels. Unused positions keep their
/// clean example.
#[derive(Clone, Debug)]
pub struct KeyBlockFlipAdversary {
    pub concept: IceConcept,
}

impl StrongMaliciousStrategy for KeyBlockFlipAdversary {
    fn corrupt(&self, clean: &Sample, eligible: &[usize], rng: &mut SimRng) -> StrategyOutcome {
        let params = &self.concept.family.params;
        let mut is_eligible = vec![false; clean.len()];
        for &i in eligible {
            is_eligible[i] = true;
        }
        let mut survivors: Vec<Vec<DomainPoint>> = vec![Vec::new(); params.w];
        for (i, e) in clean.iter().enumerate() {
            if let (Some(j), false) = (params.block_of(e.point), is_eligible[i]) {
                survivors[j].push(e.point);
            }
        }
        let mut slots = eligible.iter();
        let mut out = StrategyOutcome::default();
        'blocks: for (j, points) in survivors.iter().enumerate() {
            let wrong = self.concept.codeword.symbol(j).flip();
            let range = params.block_range(j);
            let targets = points.iter().copied().chain((0..points.len()).map(|_| DomainPoint(rng.gen_range(range.clone()))));
            for x in targets {
                let Some(&i) = slots.next() else { break 'blocks };
                out.corruptions.push(Corruption { index: i, replacement: LabeledExample { point: x, label: wrong } });
            }
        }
        out
    }
}

/// Per-block bookkeeping of a strong malicious corruption.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCounters {
    /// Clean examples at positions that were not corrupted.
    pub alpha: u64,
    /// New examples with the correct label.
    pub beta: u64,
    /// New wrong-label examples cancelled by ICE.
    pub gamma: u64,
    /// New wrong-label examples that survive ICE.
    pub delta: u64,
    /// Clean survivors that also survive ICE.
    pub alpha_prime: u64,
    /// New correct examples that survive ICE.
    pub beta_prime: u64,
}

impl BlockCounters {
    /// `alpha' + beta' = alpha + beta - gamma`.
    pub fn pickle_holds(&self) -> bool {
        self.alpha_prime + self.beta_prime + self.gamma == self.alpha + self.beta
    }

    /// `b (alpha' + beta' - delta) / (R (1 - eta))`, the key-bit guess
    /// recomputed from the counters.
    pub fn guess(&self, bit: Label, r: f64, eta: f64) -> f64 {
        let net = (self.alpha_prime + self.beta_prime) as i64 - self.delta as i64;
        (bit.sign() as i64 * net) as f64 / (r * (1.0 - eta))
    }
}

pub fn block_counters(c: &IceConcept, corrupted: &Sample, ledger: &CorruptionLedger) -> Vec<BlockCounters> {
    let params = &c.family.params;
    let mut counters = vec![BlockCounters::default(); params.w];
    // (correct, incorrect) counts per key point, over survivors and new examples.
    let mut per_point: HashMap<usize, [u64; 2]> = HashMap::new();
    for (i, e) in corrupted.iter().enumerate() {
        let Some(j) = params.block_of(e.point) else { continue };
        let correct = e.label == c.label(e.point);
        if ledger.is_corrupted(i) {
            if correct {
                counters[j].beta += 1;
            }
        } else {
            counters[j].alpha += 1;
        }
        per_point.entry(e.point.0).or_default()[usize::from(!correct)] += 1;
    }
    for (&x, &[cor, inc]) in &per_point {
        let j = x / params.block_size;
        counters[j].gamma += cor.min(inc);
        counters[j].delta += inc.saturating_sub(cor);
    }
    for i in ice_filter_indices(corrupted) {
        let e = corrupted[i];
        let Some(j) = params.block_of(e.point) else { continue };
        if e.label != c.label(e.point) {
            continue;
        }
        if ledger.is_corrupted(i) {
            counters[j].beta_prime += 1;
        } else {
            counters[j].alpha_prime += 1;
        }
    }
    counters
}

/// A strong malicious strategy replaying a nasty strategy.
///
/// The nasty strategy sees the clean examples at non-corruptible positions,
/// plus the last corruptible position when their number `m` is odd. Each of
/// its `k` replacements costs two corruptible positions: a contradiction of
/// the replaced example and the new example. The remaining `floor(m/2) - k`
/// pairs are self-cancelling `(x, +1), (x, -1)` at a filler point. After ICE
/// the result equals the ICE of the nasty output as a multiset.
pub struct NastyViaStrongMalicious<'a> {
    pub nasty: &'a dyn NastyStrategy,
    pub budget: usize,
    pub filler: DomainPoint,
}

/// The nasty view of a strong malicious draw and what the nasty strategy did.
#[derive(Clone, Debug)]
pub struct NastyView {
    /// Positions of the nasty input inside the strong malicious sample.
    pub positions: Vec<usize>,
    pub input: Sample,
    pub output: Sample,
    pub ledger: CorruptionLedger,
    /// Whether `k <= floor(m/2)`.
    pub malleable: bool,
}

impl NastyViaStrongMalicious<'_> {
    pub fn nasty_view(&self, clean: &Sample, eligible: &[usize], rng: &mut SimRng) -> Result<NastyView> {
        let mut is_eligible = vec![false; clean.len()];
        for &i in eligible {
            is_eligible[i] = true;
        }
        let mut positions: Vec<usize> = (0..clean.len()).filter(|&i| !is_eligible[i]).collect();
        if eligible.len() % 2 == 1 {
            positions.push(*eligible.last().expect("odd length"));
            positions.sort_unstable();
        }
        let input: Sample = positions.iter().map(|&i| clean[i]).collect();
        let (output, ledger) = nasty_with_budget(&input, self.budget, self.nasty, rng)?;
        let malleable = ledger.budget <= eligible.len() / 2;
        Ok(NastyView { positions, input, output, ledger, malleable })
    }

    fn plan(&self, view: &NastyView, eligible: &[usize]) -> StrategyOutcome {
        let pairs = eligible.len() / 2;
        let k = view.ledger.budget.min(pairs);
        let mut out = StrategyOutcome { exhausted: !view.malleable, ..Default::default() };
        for t in 0..pairs {
            let (a, b) = if t < k {
                (view.ledger.replaced[t].contradiction(), view.ledger.introduced[t])
            } else {
                (LabeledExample { point: self.filler, label: Label::Pos }, LabeledExample { point: self.filler, label: Label::Neg })
            };
            out.corruptions.push(Corruption { index: eligible[2 * t], replacement: a });
            out.corruptions.push(Corruption { index: eligible[2 * t + 1], replacement: b });
        }
        out
    }
}

impl StrongMaliciousStrategy for NastyViaStrongMalicious<'_> {
    /// A non-malleable draw replays only the first `floor(m/2)` replacements
    /// and is flagged as exhausted.
    fn corrupt(&self, clean: &Sample, eligible: &[usize], rng: &mut SimRng) -> StrategyOutcome {
        match self.nasty_view(clean, eligible, rng) {
            Ok(view) => self.plan(&view, eligible),
            Err(_) => StrategyOutcome { exhausted: true, ..Default::default() },
        }
    }
}

/// Both sides of one coupled draw.
#[derive(Clone, Debug)]
pub struct CouplingRun {
    pub view: NastyView,
    pub strong_output: Sample,
    pub strong_ledger: CorruptionLedger,
}

impl CouplingRun {
    /// `ice_filter(strong output) == ice_filter(nasty output)` as multisets.
    pub fn ice_equal(&self) -> bool {
        multiset(ice_filter(&self.strong_output).as_slice()) == multiset(ice_filter(&self.view.output).as_slice())
    }

    /// `ice_filter(strong output) == nasty output` as multisets; holds when
    /// the nasty output has no contradictory pair.
    pub fn exact_equal(&self) -> bool {
        multiset(ice_filter(&self.strong_output).as_slice()) == multiset(self.view.output.as_slice())
    }
}

/// Runs the nasty strategy and its strong malicious replay on the same draw.
pub fn nasty_via_strong_malicious(
    adapter: &NastyViaStrongMalicious<'_>,
    clean: &Sample,
    eligible: Vec<usize>,
    rng: &mut SimRng,
) -> Result<CouplingRun> {
    let view = adapter.nasty_view(clean, &eligible, rng)?;
    let plan = adapter.plan(&view, &eligible);
    struct Fixed(StrategyOutcome);
    impl StrongMaliciousStrategy for Fixed {
        fn corrupt(&self, _: &Sample, _: &[usize], _: &mut SimRng) -> StrategyOutcome {
            self.0.clone()
        }
    }
    let (strong_output, strong_ledger) = strong_malicious_with(clean, eligible, &Fixed(plan), rng)?;
    Ok(CouplingRun { view, strong_output, strong_ledger })
}
