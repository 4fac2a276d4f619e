//! Finite domains, labeled samples, distributions, concepts and hypotheses.
//!
//! A domain is the index range `0..size`. Labels are signs. A distribution
//! over labeled examples lives on the product index space, where the example
//! `(x, y)` has index `2x` for `y = -1` and `2x + 1` for `y = +1`.

use std::fmt;
use std::ops::{Index, Neg};
use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{RngHandle, SimRng};

/// A sign label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    pub const fn sign(self) -> i32 {
        match self {
            Label::Neg => -1,
            Label::Pos => 1,
        }
    }

    pub const fn flip(self) -> Self {
        match self {
            Label::Neg => Label::Pos,
            Label::Pos => Label::Neg,
        }
    }

    /// GF(2) view: `+1` is zero and `-1` is one.
    pub const fn bit(self) -> bool {
        matches!(self, Label::Neg)
    }

    pub const fn from_bit(bit: bool) -> Self {
        if bit {
            Label::Neg
        } else {
            Label::Pos
        }
    }

    /// Sign of a real number, with zero mapped to `+1`.
    pub fn from_real(v: f64) -> Self {
        if v < 0.0 {
            Label::Neg
        } else {
            Label::Pos
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '+' => Some(Label::Pos),
            '-' => Some(Label::Neg),
            _ => None,
        }
    }

    pub const fn as_char(self) -> char {
        match self {
            Label::Neg => '-',
            Label::Pos => '+',
        }
    }
}

impl Neg for Label {
    type Output = Label;
    fn neg(self) -> Label {
        self.flip()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}1", self.as_char())
    }
}

/// An index into a finite domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DomainPoint(pub usize);

impl DomainPoint {
    pub fn checked(index: usize, size: usize) -> Result<Self> {
        if index < size {
            Ok(DomainPoint(index))
        } else {
            Err(Error::PointOutOfRange { point: index, size })
        }
    }

    pub const fn index(self) -> usize {
        self.0
    }
}

/// A point together with its label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabeledExample {
    pub point: DomainPoint,
    pub label: Label,
}

impl LabeledExample {
    pub const fn new(point: usize, label: Label) -> Self {
        Self { point: DomainPoint(point), label }
    }

    /// The same point with the opposite label.
    pub const fn contradiction(self) -> Self {
        Self { point: self.point, label: self.label.flip() }
    }

    /// Index in the labeled product space.
    pub const fn labeled_index(self) -> usize {
        2 * self.point.0 + matches!(self.label, Label::Pos) as usize
    }

    pub const fn from_labeled_index(index: usize) -> Self {
        Self::new(index / 2, if index % 2 == 1 { Label::Pos } else { Label::Neg })
    }
}

/// An ordered multiset of labeled examples.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sample {
    examples: Vec<LabeledExample>,
}

impl Sample {
    pub const fn new() -> Self {
        Self { examples: Vec::new() }
    }

    pub fn from_vec(examples: Vec<LabeledExample>) -> Self {
        Self { examples }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn push(&mut self, example: LabeledExample) {
        self.examples.push(example);
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledExample> {
        self.examples.iter()
    }

    pub fn as_slice(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn as_mut_slice(&mut self) -> &mut [LabeledExample] {
        &mut self.examples
    }

    pub fn into_vec(self) -> Vec<LabeledExample> {
        self.examples
    }

    /// The examples sorted, for multiset comparisons.
    pub fn sorted(&self) -> Vec<LabeledExample> {
        let mut v = self.examples.clone();
        v.sort_unstable();
        v
    }

    pub fn same_multiset(&self, other: &Sample) -> bool {
        self.len() == other.len() && self.sorted() == other.sorted()
    }

    /// Largest point index plus one, or zero for an empty sample.
    pub fn point_bound(&self) -> usize {
        self.examples.iter().map(|e| e.point.0 + 1).max().unwrap_or(0)
    }
}

impl Index<usize> for Sample {
    type Output = LabeledExample;
    fn index(&self, i: usize) -> &LabeledExample {
        &self.examples[i]
    }
}

impl FromIterator<LabeledExample> for Sample {
    fn from_iter<I: IntoIterator<Item = LabeledExample>>(iter: I) -> Self {
        Self { examples: iter.into_iter().collect() }
    }
}

impl IntoIterator for Sample {
    type Item = LabeledExample;
    type IntoIter = std::vec::IntoIter<LabeledExample>;
    fn into_iter(self) -> Self::IntoIter {
        self.examples.into_iter()
    }
}

impl<'a> IntoIterator for &'a Sample {
    type Item = &'a LabeledExample;
    type IntoIter = std::slice::Iter<'a, LabeledExample>;
    fn into_iter(self) -> Self::IntoIter {
        self.examples.iter()
    }
}

const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// An explicit probability vector over `0..len`.
#[derive(Clone, Debug)]
pub struct DiscreteDistribution {
    weights: Vec<f64>,
    sampler: Sampler,
}

#[derive(Clone, Debug)]
enum Sampler {
    Uniform,
    UniformPrefix(usize),
    Point(usize),
    Weighted(WeightedIndex<f64>),
}

impl DiscreteDistribution {
    /// Validates that the weights are non-negative and sum to one.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("no support".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("weight {w} is not a probability")));
        }
        let total = compensated_sum(&weights);
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        let positive: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
        let sampler = if positive.len() == 1 {
            Sampler::Point(positive[0])
        } else {
            Sampler::Weighted(
                WeightedIndex::new(&weights).map_err(|e| Error::InvalidDistribution(e.to_string()))?,
            )
        };
        Ok(Self { weights, sampler })
    }

    /// Divides non-negative weights by their total.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total = compensated_sum(&weights);
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Self::from_weights(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidDistribution("no support".into()));
        }
        Ok(Self { weights: vec![1.0 / size as f64; size], sampler: Sampler::Uniform })
    }

    /// Uniform over `0..support`, with zero mass on `support..size`.
    pub fn uniform_prefix(support: usize, size: usize) -> Result<Self> {
        if support == 0 || support > size {
            return Err(Error::InvalidDistribution(format!("support {support} of {size}")));
        }
        if support == size {
            return Self::uniform(size);
        }
        let mut weights = vec![0.0; size];
        weights[..support].fill(1.0 / support as f64);
        Ok(Self { weights, sampler: Sampler::UniformPrefix(support) })
    }

    pub fn point_mass(point: usize, size: usize) -> Result<Self> {
        DomainPoint::checked(point, size)?;
        let mut weights = vec![0.0; size];
        weights[point] = 1.0;
        Ok(Self { weights, sampler: Sampler::Point(point) })
    }

    /// The clean labeled-example distribution `D_c` over the product space.
    pub fn clean_labeled<C: Concept + ?Sized>(d: &Self, c: &C) -> Result<Self> {
        check_size(d.len(), c.domain_size())?;
        let mut weights = vec![0.0; 2 * d.len()];
        for (x, &p) in d.weights.iter().enumerate() {
            weights[LabeledExample::new(x, c.label(DomainPoint(x))).labeled_index()] = p;
        }
        Self::from_weights(weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.weights.get(index).copied().unwrap_or(0.0)
    }

    pub fn sample_index(&self, rng: &mut SimRng) -> usize {
        match &self.sampler {
            Sampler::Uniform => rng.gen_range(0..self.weights.len()),
            Sampler::UniformPrefix(s) => rng.gen_range(0..*s),
            Sampler::Point(p) => *p,
            Sampler::Weighted(w) => w.sample(rng),
        }
    }

    pub fn sample_point(&self, rng: &mut SimRng) -> DomainPoint {
        DomainPoint(self.sample_index(rng))
    }
}

fn compensated_sum(values: &[f64]) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

pub(crate) fn check_size(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DomainMismatch { expected, found })
    }
}

/// A deterministic labeling of a finite domain.
pub trait Concept: Send + Sync {
    fn domain_size(&self) -> usize;
    fn label(&self, x: DomainPoint) -> Label;
}

impl<C: Concept + ?Sized> Concept for Arc<C> {
    fn domain_size(&self) -> usize {
        (**self).domain_size()
    }
    fn label(&self, x: DomainPoint) -> Label {
        (**self).label(x)
    }
}

impl<C: Concept + ?Sized> Concept for &C {
    fn domain_size(&self) -> usize {
        (**self).domain_size()
    }
    fn label(&self, x: DomainPoint) -> Label {
        (**self).label(x)
    }
}

/// A concept given by its truth table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableConcept {
    labels: Vec<Label>,
}

impl TableConcept {
    pub fn new(labels: Vec<Label>) -> Self {
        Self { labels }
    }

    pub fn of<C: Concept + ?Sized>(c: &C) -> Self {
        Self::new((0..c.domain_size()).map(|x| c.label(DomainPoint(x))).collect())
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }
}

impl Concept for TableConcept {
    fn domain_size(&self) -> usize {
        self.labels.len()
    }
    fn label(&self, x: DomainPoint) -> Label {
        self.labels[x.0]
    }
}

/// The same label everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstantConcept {
    pub domain_size: usize,
    pub label: Label,
}

impl Concept for ConstantConcept {
    fn domain_size(&self) -> usize {
        self.domain_size
    }
    fn label(&self, _: DomainPoint) -> Label {
        self.label
    }
}

/// Pointwise negation of another concept.
#[derive(Clone)]
pub struct Negated(pub Arc<dyn Concept>);

impl Concept for Negated {
    fn domain_size(&self) -> usize {
        self.0.domain_size()
    }
    fn label(&self, x: DomainPoint) -> Label {
        self.0.label(x).flip()
    }
}

/// A learner's output: a concept, or a uniform mixture of hypotheses.
#[derive(Clone)]
pub enum Hypothesis {
    Deterministic(Arc<dyn Concept>),
    Mixture(Arc<[Hypothesis]>),
}

impl fmt::Debug for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::Deterministic(c) => write!(f, "Deterministic(|X| = {})", c.domain_size()),
            Hypothesis::Mixture(hs) => f.debug_tuple("Mixture").field(&hs.len()).finish(),
        }
    }
}

impl Hypothesis {
    pub fn deterministic<C: Concept + 'static>(c: C) -> Self {
        Hypothesis::Deterministic(Arc::new(c))
    }

    pub fn constant(domain_size: usize, label: Label) -> Self {
        Self::deterministic(ConstantConcept { domain_size, label })
    }

    /// Uniform mixture; a single component is returned unwrapped.
    pub fn mixture(mut components: Vec<Hypothesis>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::Empty("mixture components"));
        };
        let size = first.domain_size();
        for h in &components {
            check_size(size, h.domain_size())?;
        }
        if components.len() == 1 {
            return Ok(components.pop().unwrap());
        }
        Ok(Hypothesis::Mixture(components.into()))
    }

    pub fn domain_size(&self) -> usize {
        match self {
            Hypothesis::Deterministic(c) => c.domain_size(),
            Hypothesis::Mixture(hs) => hs[0].domain_size(),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, Hypothesis::Deterministic(_))
    }

    pub fn components(&self) -> &[Hypothesis] {
        match self {
            Hypothesis::Deterministic(_) => std::slice::from_ref(self),
            Hypothesis::Mixture(hs) => hs,
        }
    }

    /// Exact probability that `h(x) != y`.
    pub fn disagreement(&self, x: DomainPoint, y: Label) -> f64 {
        match self {
            Hypothesis::Deterministic(c) => (c.label(x) != y) as u8 as f64,
            Hypothesis::Mixture(hs) => {
                hs.iter().map(|h| h.disagreement(x, y)).sum::<f64>() / hs.len() as f64
            }
        }
    }

    /// Evaluates with a per-query component draw taken from `rng`.
    pub fn eval(&self, x: DomainPoint, rng: &mut SimRng) -> Label {
        match self {
            Hypothesis::Deterministic(c) => c.label(x),
            Hypothesis::Mixture(hs) => hs[rng.gen_range(0..hs.len())].eval(x, rng),
        }
    }

    /// Evaluates with the component draw fixed by a query seed.
    pub fn eval_with(&self, x: DomainPoint, query: RngHandle) -> Label {
        self.eval(x, &mut query.rng())
    }

    /// Pointwise negation; mixtures negate every component.
    pub fn negate(&self) -> Self {
        match self {
            Hypothesis::Deterministic(c) => Hypothesis::Deterministic(Arc::new(Negated(c.clone()))),
            Hypothesis::Mixture(hs) => Hypothesis::Mixture(hs.iter().map(Hypothesis::negate).collect()),
        }
    }
}

impl<C: Concept + 'static> From<Arc<C>> for Hypothesis {
    fn from(c: Arc<C>) -> Self {
        Hypothesis::Deterministic(c)
    }
}

/// Exact error `sum_x D(x) Pr[h(x) != c(x)]`.
pub fn error_rate<C: Concept + ?Sized>(h: &Hypothesis, c: &C, d: &DiscreteDistribution) -> Result<f64> {
    check_size(d.len(), c.domain_size())?;
    check_size(d.len(), h.domain_size())?;
    let total: f64 = d
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(x, &p)| {
            let x = DomainPoint(x);
            p * h.disagreement(x, c.label(x))
        })
        .sum();
    Ok(total.clamp(0.0, 1.0))
}

/// Fraction of the sample that `h` mislabels, averaging mixtures exactly.
pub fn empirical_error(h: &Hypothesis, s: &Sample) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::Empty("sample"));
    }
    let size = h.domain_size();
    let mut total = 0.0;
    for e in s {
        DomainPoint::checked(e.point.0, size)?;
        total += h.disagreement(e.point, e.label);
    }
    Ok(total / s.len() as f64)
}

/// `n` i.i.d. draws from `D`, labeled by `c`.
pub fn draw_clean_sample<C: Concept + ?Sized>(
    d: &DiscreteDistribution,
    c: &C,
    n: usize,
    rng: &mut SimRng,
) -> Result<Sample> {
    check_size(d.len(), c.domain_size())?;
    Ok((0..n)
        .map(|_| {
            let x = d.sample_point(rng);
            LabeledExample { point: x, label: c.label(x) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(s: &str) -> TableConcept {
        TableConcept::new(s.chars().map(|c| Label::from_char(c).unwrap()).collect())
    }

    #[test]
    fn error_rate_examples() {
        let c = table("++-+");
        let d = DiscreteDistribution::uniform(4).unwrap();
        let same = Hypothesis::deterministic(c.clone());
        assert_eq!(error_rate(&same, &c, &d).unwrap(), 0.0);
        assert_eq!(error_rate(&same.negate(), &c, &d).unwrap(), 1.0);
        let one_off = Hypothesis::deterministic(table("++++"));
        assert_eq!(error_rate(&one_off, &c, &d).unwrap(), 0.25);
    }

    #[test]
    fn error_rate_size_mismatch() {
        let c = table("++-+");
        let d = DiscreteDistribution::uniform(3).unwrap();
        let h = Hypothesis::deterministic(c.clone());
        assert!(matches!(error_rate(&h, &c, &d), Err(Error::DomainMismatch { .. })));
    }

    #[test]
    fn empirical_error_examples() {
        let c = table("+-");
        let s = Sample::from_vec(vec![LabeledExample::new(0, Label::Pos), LabeledExample::new(1, Label::Neg)]);
        let h = Hypothesis::deterministic(c.clone());
        assert_eq!(empirical_error(&h, &s).unwrap(), 0.0);
        assert_eq!(empirical_error(&Hypothesis::constant(2, Label::Pos), &s).unwrap(), 0.5);
        let mix = Hypothesis::mixture(vec![h.clone(), h.negate()]).unwrap();
        assert_eq!(empirical_error(&mix, &s).unwrap(), 0.5);
        assert_eq!(empirical_error(&h, &Sample::new()), Err(Error::Empty("sample")));
    }

    #[test]
    fn distribution_validation() {
        assert!(DiscreteDistribution::from_weights(vec![0.5, 0.4]).is_err());
        assert!(DiscreteDistribution::from_weights(vec![1.5, -0.5]).is_err());
        assert!(DiscreteDistribution::from_weights(vec![0.25; 4]).is_ok());
        let u = DiscreteDistribution::uniform(64_000).unwrap();
        assert!((compensated_sum(u.weights()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn draw_degenerate_cases() {
        let c = table("+-+");
        let mut rng = RngHandle::from_seed(1).rng();
        let d = DiscreteDistribution::uniform(3).unwrap();
        assert!(draw_clean_sample(&d, &c, 0, &mut rng).unwrap().is_empty());
        let pm = DiscreteDistribution::point_mass(1, 3).unwrap();
        let s = draw_clean_sample(&pm, &c, 20, &mut rng).unwrap();
        assert!(s.iter().all(|e| *e == LabeledExample::new(1, Label::Neg)));
    }

    #[test]
    fn uniform_two_points_balanced() {
        let c = table("+-");
        let d = DiscreteDistribution::uniform(2).unwrap();
        let s = draw_clean_sample(&d, &c, 10_000, &mut RngHandle::from_seed(9).rng()).unwrap();
        let zeros = s.iter().filter(|e| e.point.0 == 0).count() as f64;
        // sd = sqrt(10^4 / 4) = 50
        assert!((zeros - 5000.0).abs() <= 4.0 * 50.0);
    }

    #[test]
    fn labeled_index_roundtrip() {
        for i in 0..20 {
            assert_eq!(LabeledExample::from_labeled_index(i).labeled_index(), i);
        }
    }

    #[test]
    fn mixture_eval_with_is_repeatable() {
        let c = table("+-+-");
        let h = Hypothesis::deterministic(c);
        let mix = Hypothesis::mixture(vec![h.clone(), h.negate()]).unwrap();
        let q = RngHandle::new(5, 2);
        for x in 0..4 {
            assert_eq!(mix.eval_with(DomainPoint(x), q), mix.eval_with(DomainPoint(x), q));
        }
    }
}
