//! Statistical checks used by tests and experiment verdicts.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

use crate::error::{Error, Result};

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

/// Default significance level for goodness-of-fit verdicts.
pub const SIGNIFICANCE: f64 = 1e-3;

/// A point estimate with a symmetric interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.low <= v && v <= self.high
    }

    pub fn halfwidth(&self) -> f64 {
        (self.high - self.low) / 2.0
    }
}

/// Wald interval for a binomial proportion, clamped to `[0, 1]`.
pub fn binomial_ci(successes: u64, trials: u64, z: f64) -> Result<Interval> {
    if trials == 0 {
        return Err(Error::Empty("trials"));
    }
    let p = successes as f64 / trials as f64;
    let h = z * (p * (1.0 - p) / trials as f64).sqrt();
    Ok(Interval { estimate: p, low: (p - h).max(0.0), high: (p + h).min(1.0) })
}

/// Normal-approximation interval for a mean; `None` halfwidth for one value.
pub fn mean_ci(values: &[f64], z: f64) -> Result<(f64, Option<f64>)> {
    if values.is_empty() {
        return Err(Error::Empty("values"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return Ok((mean, None));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, Some(z * (var / n).sqrt())))
}

/// Whether `observed` is within `k` standard deviations of `Bin(n, p)`'s mean.
pub fn within_sigmas(observed: f64, n: u64, p: f64, k: f64) -> bool {
    let mean = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    (observed - mean).abs() <= k * sd
}

/// Result of a chi-square test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareOutcome {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    dist.sf(statistic)
}

/// Goodness of fit of `observed` counts against expected probabilities.
///
/// Adjacent cells are pooled left to right until each expected count is at
/// least five; a short tail is merged into the last pooled cell.
pub fn chi_square_gof(observed: &[u64], probabilities: &[f64]) -> Result<ChiSquareOutcome> {
    if observed.len() != probabilities.len() {
        return Err(Error::InvalidParameter("observed and expected lengths differ".into()));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::Empty("observations"));
    }
    let n = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&obs, &p) in observed.iter().zip(probabilities) {
        o += obs as f64;
        e += p * n;
        if e >= 5.0 {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len().saturating_sub(1);
    Ok(ChiSquareOutcome { statistic, dof, p_value: chi_square_p(statistic, dof) })
}

/// Goodness of fit of integer observations against `Bin(n, p)`.
pub fn chi_square_binomial(values: &[u64], n: u64, p: f64) -> Result<ChiSquareOutcome> {
    let dist = Binomial::new(p, n).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut counts = vec![0u64; n as usize + 1];
    for &v in values {
        if v > n {
            return Err(Error::InvalidParameter(format!("observation {v} exceeds {n}")));
        }
        counts[v as usize] += 1;
    }
    let probs: Vec<f64> = (0..=n).map(|k| dist.pmf(k)).collect();
    chi_square_gof(&counts, &probs)
}

/// Two-sample chi-square test of homogeneity over shared categories.
///
/// Categories empty in both samples are dropped; sparse categories are pooled
/// until the combined count is at least ten.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquareOutcome> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter("category counts differ".into()));
    }
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return Err(Error::Empty("observations"));
    }
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut ca, mut cb) = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        ca += x as f64;
        cb += y as f64;
        if ca + cb >= 10.0 {
            cells.push((ca, cb));
            ca = 0.0;
            cb = 0.0;
        }
    }
    if ca + cb > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += ca;
                last.1 += cb;
            }
            None => cells.push((ca, cb)),
        }
    }
    let (na, nb) = (na as f64, nb as f64);
    let n = na + nb;
    let statistic: f64 = cells
        .iter()
        .map(|&(x, y)| {
            let col = x + y;
            let ea = na * col / n;
            let eb = nb * col / n;
            (x - ea).powi(2) / ea + (y - eb).powi(2) / eb
        })
        .sum();
    let dof = cells.len().saturating_sub(1);
    Ok(ChiSquareOutcome { statistic, dof, p_value: chi_square_p(statistic, dof) })
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Exact upper tail `Pr[Bin(n, p) >= k]`.
pub fn binomial_upper_tail(n: u64, p: f64, k: u64) -> Result<f64> {
    let dist = Binomial::new(p, n).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok((k..=n).map(|j| dist.pmf(j)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_ci_contains_estimate() {
        let ci = binomial_ci(30, 100, Z_99).unwrap();
        assert!(ci.contains(0.3));
        assert!((ci.halfwidth() - Z_99 * (0.21f64 / 100.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gof_exact_fit_has_p_one() {
        let out = chi_square_gof(&[25, 25, 25, 25], &[0.25; 4]).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert_eq!(out.dof, 3);
        assert!((out.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gof_detects_misfit() {
        let out = chi_square_gof(&[100, 0], &[0.5, 0.5]).unwrap();
        assert!(!out.passes(SIGNIFICANCE));
    }

    #[test]
    fn chi_square_p_reference_value() {
        // chi2.sf(3.84145882, 1) = 0.05
        assert!((chi_square_p(3.841_458_820_694_124, 1) - 0.05).abs() < 1e-9);
    }

    #[test]
    fn two_sample_identical_passes() {
        let out = chi_square_two_sample(&[10, 20, 30], &[20, 40, 60]).unwrap();
        assert!(out.statistic.abs() < 1e-12);
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        // H(0.25) = 0.8112781244591328
        assert!((binary_entropy(0.25) - 0.811_278_124_459_132_8).abs() < 1e-15);
    }

    #[test]
    fn upper_tail_reference() {
        // P[Bin(10, 0.3) >= 5] = 0.150268...
        let p = binomial_upper_tail(10, 0.3, 5).unwrap();
        assert!((p - 0.150_268_2).abs() < 1e-6);
    }
}
