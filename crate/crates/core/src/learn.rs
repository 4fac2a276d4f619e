//! Learners and meta-learners.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{
    empirical_error, error_rate, Concept, DiscreteDistribution, Hypothesis, Label, LabeledExample, Sample,
};
use crate::error::{Error, Result};
use crate::noise::NoiseProcess;
use crate::rng::{RngHandle, SimRng};
use crate::stats::{mean_ci, Z_99};

/// A learning algorithm with a fixed sample size.
pub trait Learner: Send + Sync {
    fn sample_size(&self) -> usize;

    /// Trains on exactly `sample_size()` examples.
    fn learn(&self, sample: &Sample, rng: &mut SimRng) -> Result<Hypothesis>;
}

/// Runs `learner`, first subsampling oversized inputs down to its sample size.
pub fn train(learner: &dyn Learner, sample: &Sample, rng: &mut SimRng) -> Result<Hypothesis> {
    let n = learner.sample_size();
    match sample.len() {
        m if m < n => Err(Error::SampleLength { expected: n, found: m }),
        m if m == n => learner.learn(sample, rng),
        _ => {
            let sub = subsample_filter(sample, n, rng)?;
            learner.learn(&sub, rng)
        }
    }
}

/// Positions kept by [`ice_filter`], in increasing order.
pub fn ice_filter_indices(s: &Sample) -> Vec<usize> {
    let mut diff: HashMap<usize, i64> = HashMap::new();
    for e in s {
        *diff.entry(e.point.0).or_default() += e.label.sign() as i64;
    }
    let mut kept: HashMap<usize, i64> = HashMap::with_capacity(diff.len());
    let mut out = Vec::new();
    for (i, e) in s.iter().enumerate() {
        let d = diff[&e.point.0];
        if d == 0 || (d > 0) != (e.label == Label::Pos) {
            continue;
        }
        let k = kept.entry(e.point.0).or_default();
        if *k < d.abs() {
            *k += 1;
            out.push(i);
        }
    }
    out
}

/// Ignore contradictory examples: cancels `(x, +1), (x, -1)` pairs until none
/// remain.
///
/// Each point keeps `|c+(x) - c-(x)|` copies of its majority label; survivors
/// are the first occurrences, in their original order.
pub fn ice_filter(s: &Sample) -> Sample {
    ice_filter_indices(s).into_iter().map(|i| s[i]).collect()
}

/// A uniform `n`-subset of `s`, in random order.
pub fn subsample_filter(s: &Sample, n: usize, rng: &mut SimRng) -> Result<Sample> {
    if n > s.len() {
        return Err(Error::SampleLength { expected: n, found: s.len() });
    }
    Ok(rand::seq::index::sample(rng, s.len(), n).into_iter().map(|i| s[i]).collect())
}

/// Number of groups and confidence target for [`amplify`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplifyParams {
    pub k: usize,
    pub eps_additional: f64,
    pub delta: f64,
}

impl AmplifyParams {
    pub fn new(k: usize, eps_additional: f64, delta: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(eps_additional > 0.0) {
            return Err(Error::InvalidParameter(format!("eps_additional = {eps_additional}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta = {delta}")));
        }
        Ok(Self { k, eps_additional, delta })
    }

    /// `k = ceil(c_k ln(1/delta) / eps^2)`.
    pub fn derived(eps_additional: f64, delta: f64, c_k: f64) -> Result<Self> {
        Self::new(1, eps_additional, delta)?;
        let k = (c_k * (1.0 / delta).ln() / (eps_additional * eps_additional)).ceil();
        Self::new((k as usize).max(1), eps_additional, delta)
    }
}

/// Random permutation of `s` cut into `k` consecutive groups of `n`.
pub fn split_groups(s: &Sample, n: usize, k: usize, rng: &mut SimRng) -> Result<Vec<Sample>> {
    if s.len() != n * k {
        return Err(Error::SampleLength { expected: n * k, found: s.len() });
    }
    let mut v = s.as_slice().to_vec();
    v.shuffle(rng);
    Ok((0..k).map(|i| Sample::from_vec(v[i * n..(i + 1) * n].to_vec())).collect())
}

fn train_groups(a: &dyn Learner, groups: &[Sample], rng: RngHandle) -> Result<Vec<Hypothesis>> {
    groups
        .par_iter()
        .enumerate()
        .map(|(i, g)| a.learn(g, &mut rng.child(1 + i as u64).rng()))
        .collect()
}

/// The `k` hypotheses trained by [`amplify`], before mixing.
pub fn amplify_components(
    a: &dyn Learner,
    params: &AmplifyParams,
    s_big: &Sample,
    rng: RngHandle,
) -> Result<Vec<Hypothesis>> {
    let groups = split_groups(s_big, a.sample_size(), params.k, &mut rng.child(0).rng())?;
    train_groups(a, &groups, rng)
}

/// Trains `a` on `k` disjoint groups of a permuted sample and returns the
/// uniform mixture of the results.
pub fn amplify(a: &dyn Learner, params: &AmplifyParams, s_big: &Sample, rng: RngHandle) -> Result<Hypothesis> {
    Hypothesis::mixture(amplify_components(a, params, s_big, rng)?)
}

/// What [`bad_amplify`] saw and chose.
#[derive(Clone, Debug)]
pub struct HoldoutSelection {
    pub hypothesis: Hypothesis,
    pub chosen: usize,
    pub candidates: Vec<Hypothesis>,
    pub test_errors: Vec<f64>,
}

/// Amplification by holdout: trains on `k` groups and returns the hypothesis
/// with the lowest error on `n_test` held-out examples, breaking ties
/// uniformly at random.
pub fn bad_amplify(
    a: &dyn Learner,
    k: usize,
    n_test: usize,
    s_big: &Sample,
    rng: RngHandle,
) -> Result<HoldoutSelection> {
    let n = a.sample_size();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if s_big.len() != n * k + n_test {
        return Err(Error::SampleLength { expected: n * k + n_test, found: s_big.len() });
    }
    let mut perm = rng.child(0).rng();
    let mut v = s_big.as_slice().to_vec();
    v.shuffle(&mut perm);
    let test = Sample::from_vec(v.split_off(n * k));
    let groups: Vec<Sample> = (0..k).map(|i| Sample::from_vec(v[i * n..(i + 1) * n].to_vec())).collect();
    let candidates = train_groups(a, &groups, rng)?;
    let test_errors: Vec<f64> = if test.is_empty() {
        vec![0.0; k]
    } else {
        candidates.iter().map(|h| empirical_error(h, &test)).collect::<Result<_>>()?
    };
    let best = test_errors.iter().copied().fold(f64::INFINITY, f64::min);
    let tied: Vec<usize> = (0..k).filter(|&i| test_errors[i] == best).collect();
    let chosen = tied[rng.child(u64::MAX).rng().gen_range(0..tied.len())];
    Ok(HoldoutSelection { hypothesis: candidates[chosen].clone(), chosen, candidates, test_errors })
}

/// Index of the first minimum.
pub fn argmin_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v < values[b]) {
            best = Some(i);
        }
    }
    best
}

/// The hypothesis with the lowest empirical error on `s_test`; ties go to the
/// lowest index.
pub fn select_best_hypothesis<'h>(hyps: &'h [Hypothesis], s_test: &Sample) -> Result<(usize, &'h Hypothesis)> {
    if hyps.is_empty() {
        return Err(Error::Empty("hypotheses"));
    }
    let errors: Vec<f64> = hyps.iter().map(|h| empirical_error(h, s_test)).collect::<Result<_>>()?;
    let i = argmin_first(&errors).expect("nonempty");
    Ok((i, &hyps[i]))
}

/// `m = ceil(C n^4 (log2(2|X|))^2 / param^4)`.
pub fn bv_sample_size(n: u64, domain_size: u64, param: f64, c: f64) -> Result<u64> {
    if !(param > 0.0) {
        return Err(Error::InvalidParameter(format!("param = {param}")));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("C = {c}")));
    }
    if domain_size == 0 {
        return Err(Error::InvalidParameter("empty domain".into()));
    }
    let log = (2.0 * domain_size as f64).log2();
    let m = (c * (n as f64).powi(4) * log * log / param.powi(4)).ceil();
    if !m.is_finite() || m >= u64::MAX as f64 {
        return Err(Error::InvalidParameter("sample size overflows u64".into()));
    }
    Ok(m as u64)
}

/// Monte-Carlo estimate of a learner's expected error under one noise process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub mean: f64,
    /// 99% normal-approximation halfwidth; `None` when `trials == 1`.
    pub ci_halfwidth: Option<f64>,
    pub trials: usize,
}

pub fn expected_error_estimate(
    a: &dyn Learner,
    d: &DiscreteDistribution,
    c: &dyn Concept,
    noise: &dyn NoiseProcess,
    trials: usize,
    rng: RngHandle,
) -> Result<ErrorEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let errors: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng.child(t as u64).rng();
            let s = noise.generate(d, c, a.sample_size(), &mut r)?;
            let h = train(a, &s, &mut r)?;
            error_rate(&h, c, d)
        })
        .collect::<Result<_>>()?;
    let (mean, ci_halfwidth) = mean_ci(&errors, Z_99)?;
    Ok(ErrorEstimate { mean, ci_halfwidth, trials })
}

/// Outputs the same hypothesis whatever it sees.
#[derive(Clone, Debug)]
pub struct FixedLearner {
    pub n: usize,
    pub hypothesis: Hypothesis,
}

impl Learner for FixedLearner {
    fn sample_size(&self) -> usize {
        self.n
    }
    fn learn(&self, _: &Sample, _: &mut SimRng) -> Result<Hypothesis> {
        Ok(self.hypothesis.clone())
    }
}

/// Outputs a constant hypothesis whose sign is a fair coin.
#[derive(Clone, Copy, Debug)]
pub struct CoinConstantLearner {
    pub n: usize,
    pub domain_size: usize,
}

impl Learner for CoinConstantLearner {
    fn sample_size(&self) -> usize {
        self.n
    }
    fn learn(&self, _: &Sample, rng: &mut SimRng) -> Result<Hypothesis> {
        let label = if rng.gen_bool(0.5) { Label::Pos } else { Label::Neg };
        Ok(Hypothesis::constant(self.domain_size, label))
    }
}

/// Outputs the constant hypothesis with the sample's majority label, `+1` on
/// ties.
#[derive(Clone, Copy, Debug)]
pub struct MajorityLearner {
    pub n: usize,
    pub domain_size: usize,
}

impl Learner for MajorityLearner {
    fn sample_size(&self) -> usize {
        self.n
    }
    fn learn(&self, s: &Sample, _: &mut SimRng) -> Result<Hypothesis> {
        Ok(Hypothesis::constant(self.domain_size, majority_label(s)))
    }
}

pub fn majority_label(s: &Sample) -> Label {
    let sum: i64 = s.iter().map(|e| e.label.sign() as i64).sum();
    Label::from_real(sum as f64)
}

/// Labeled examples as a multiset keyed by example.
pub fn multiset(s: &[LabeledExample]) -> HashMap<LabeledExample, usize> {
    let mut m = HashMap::new();
    for e in s {
        *m.entry(*e).or_default() += 1;
    }
    m
}
