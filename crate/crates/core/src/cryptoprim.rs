//! Stand-ins for a pseudorandom function family and a seeded extractor.
//!
//! The PRF is SipHash-2-4 keyed by the key bits, reduced to its low output
//! bit. The extractor is a Toeplitz matrix over GF(2) whose diagonals are
//! expanded from a short seed by SipHash-2-4-128 under a fixed key, so it is
//! linear in its input for every seed.

use std::hash::Hasher;

use serde::{Deserialize, Serialize};
use siphasher::sip::SipHasher24;
use siphasher::sip128::{Hasher128, SipHasher24 as SipHasher24x128};

use crate::codes::{bits_to_signs, signs_to_bits};
use crate::domain::Label;
use crate::error::{Error, Result};

/// Longest supported PRF key.
pub const MAX_KEY_BITS: usize = 128;
/// Longest supported extractor seed.
pub const MAX_SEED_BITS: usize = 16;

const EXPANSION_KEY: (u64, u64) = (0x243f_6a88_85a3_08d3, 0x1319_8a2e_0370_7344);

/// A PRF key of at most 128 sign bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrfKey {
    bits: Vec<Label>,
    k0: u64,
    k1: u64,
}

impl PrfKey {
    pub fn new(bits: Vec<Label>) -> Result<Self> {
        if bits.len() > MAX_KEY_BITS {
            return Err(Error::InvalidParameter(format!("{}-bit key exceeds {MAX_KEY_BITS}", bits.len())));
        }
        let k0 = signs_to_bits(&bits[..bits.len().min(64)]);
        let k1 = if bits.len() > 64 { signs_to_bits(&bits[64..]) } else { 0 };
        // Fold the length in so keys of different lengths never collide.
        let k1 = k1 ^ (bits.len() as u64) << 56;
        Ok(Self { bits, k0, k1 })
    }

    /// The `len` low bits of `value`, as a key.
    pub fn from_u64(value: u64, len: usize) -> Result<Self> {
        if len > 64 {
            return Err(Error::InvalidParameter(format!("{len}-bit key from a u64")));
        }
        Self::new(bits_to_signs(value, len))
    }

    pub fn bits(&self) -> &[Label] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// `f_key(x)`: one bit of a keyed hash of `x`.
pub fn prf_eval(key: &PrfKey, x: u64) -> Label {
    let mut h = SipHasher24::new_with_keys(key.k0, key.k1);
    h.write_u64(x);
    Label::from_bit(h.finish() & 1 == 1)
}

/// Input, seed and output lengths of the extractor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExtractorSpec {
    pub input_bits: usize,
    pub seed_bits: usize,
    pub output_bits: usize,
}

impl ExtractorSpec {
    pub fn new(input_bits: usize, seed_bits: usize, output_bits: usize) -> Result<Self> {
        if input_bits == 0 || input_bits > 64 {
            return Err(Error::InvalidParameter(format!("input length {input_bits} outside 1..=64")));
        }
        if seed_bits > MAX_SEED_BITS {
            return Err(Error::InvalidParameter(format!("seed length {seed_bits} exceeds {MAX_SEED_BITS}")));
        }
        if output_bits > input_bits {
            return Err(Error::InvalidParameter(format!("output {output_bits} longer than input {input_bits}")));
        }
        Ok(Self { input_bits, seed_bits, output_bits })
    }

    pub fn seed_count(&self) -> u64 {
        1 << self.seed_bits
    }

    fn check(&self, x: u64, seed: u64) -> Result<()> {
        if self.input_bits < 64 && x >> self.input_bits != 0 {
            return Err(Error::InvalidParameter(format!("input wider than {} bits", self.input_bits)));
        }
        if seed >> self.seed_bits != 0 {
            return Err(Error::InvalidParameter(format!("seed wider than {} bits", self.seed_bits)));
        }
        Ok(())
    }

    /// Toeplitz rows for one seed; row `i` has bit `j` equal to diagonal
    /// `i - j + w - 1`.
    pub fn rows(&self, seed: u64) -> Result<Vec<u64>> {
        self.check(0, seed)?;
        let mut h = SipHasher24x128::new_with_keys(EXPANSION_KEY.0, EXPANSION_KEY.1);
        h.write_u64(seed);
        h.write_u64(self.input_bits as u64 | (self.output_bits as u64) << 8);
        let d = h.finish128();
        let diag = |t: usize| if t < 64 { d.h1 >> t & 1 } else { d.h2 >> (t - 64) & 1 };
        let w = self.input_bits;
        Ok((0..self.output_bits)
            .map(|i| (0..w).fold(0u64, |acc, j| acc | diag(i + w - 1 - j) << j))
            .collect())
    }
}

/// Applies the seeded Toeplitz hash to a `w`-bit input.
pub fn extract(x: u64, seed: u64, spec: &ExtractorSpec) -> Result<u64> {
    spec.check(x, seed)?;
    Ok(apply_rows(&spec.rows(seed)?, x))
}

/// Output bit `i` is the parity of `rows[i] & x`.
pub fn apply_rows(rows: &[u64], x: u64) -> u64 {
    rows.iter().enumerate().fold(0, |acc, (i, r)| acc | ((r & x).count_ones() as u64 & 1) << i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngHandle;
    use crate::stats::{chi_square_gof, within_sigmas};
    use rand::seq::index::sample;
    use rand::Rng;

    fn key(seed: u64, len: usize) -> PrfKey {
        let mut r = RngHandle::from_seed(seed).rng();
        PrfKey::new((0..len).map(|_| Label::from_bit(r.gen())).collect()).unwrap()
    }

    #[test]
    fn prf_is_deterministic() {
        let k = key(1, 40);
        for x in 0..100 {
            assert_eq!(prf_eval(&k, x), prf_eval(&k, x));
        }
    }

    #[test]
    fn prf_is_balanced() {
        let k = key(2, 40);
        let ones = (0..10_000).filter(|&x| prf_eval(&k, x) == Label::Pos).count();
        assert!(within_sigmas(ones as f64, 10_000, 0.5, 4.0));
    }

    #[test]
    fn one_bit_key_change_decorrelates() {
        let k = key(3, 40);
        let mut bits = k.bits().to_vec();
        bits[17] = bits[17].flip();
        let k2 = PrfKey::new(bits).unwrap();
        let agree = (0..10_000).filter(|&x| prf_eval(&k, x) == prf_eval(&k2, x)).count();
        assert!(within_sigmas(agree as f64, 10_000, 0.5, 4.0));
    }

    #[test]
    fn key_length_is_bounded() {
        assert!(PrfKey::new(vec![Label::Pos; 129]).is_err());
        assert!(PrfKey::new(vec![Label::Pos; 128]).is_ok());
        assert_ne!(PrfKey::from_u64(0, 3).unwrap(), PrfKey::from_u64(0, 4).unwrap());
    }

    #[test]
    fn monobit_truth_tables() {
        // Two-sided monobit at 1e-3 per key over 256 points.
        let failures = (0..64)
            .filter(|&s| {
                let k = key(100 + s, 64);
                let ones = (0..256).filter(|&x| prf_eval(&k, x) == Label::Pos).count() as u64;
                !chi_square_gof(&[ones, 256 - ones], &[0.5, 0.5]).unwrap().passes(1e-3)
            })
            .count();
        assert!(failures <= 2, "{failures} keys failed");
    }

    #[test]
    fn extract_examples() {
        let spec = ExtractorSpec::new(16, 8, 0).unwrap();
        assert_eq!(extract(0xbeef, 3, &spec).unwrap(), 0);
        let spec = ExtractorSpec::new(16, 8, 6).unwrap();
        assert_eq!(extract(0xbeef, 3, &spec).unwrap(), extract(0xbeef, 3, &spec).unwrap());
        assert!(extract(1 << 16, 3, &spec).is_err());
        assert!(extract(1, 256, &spec).is_err());
        assert!(ExtractorSpec::new(8, 8, 9).is_err());
        assert!(ExtractorSpec::new(8, 17, 4).is_err());
    }

    #[test]
    fn extract_is_linear() {
        let spec = ExtractorSpec::new(24, 8, 12).unwrap();
        let mut r = RngHandle::from_seed(4).rng();
        for _ in 0..200 {
            let (x, y, s) = (r.gen::<u64>() & 0xff_ffff, r.gen::<u64>() & 0xff_ffff, r.gen_range(0..256));
            let e = |v| extract(v, s, &spec).unwrap();
            assert_eq!(e(x ^ y) ^ e(x) ^ e(y) ^ e(0), 0);
        }
    }

    #[test]
    fn extract_smooths_a_weak_source() {
        // Uniform source on a random 2^10-subset of 16-bit strings; exact TV of
        // (seed, output) from uniform, averaged over all 2^8 seeds.
        let spec = ExtractorSpec::new(16, 8, 4).unwrap();
        let mut r = RngHandle::from_seed(5).rng();
        let source: Vec<u64> = sample(&mut r, 1 << 16, 1 << 10).into_iter().map(|v| v as u64).collect();
        let mut total = 0.0;
        for seed in 0..spec.seed_count() {
            let rows = spec.rows(seed).unwrap();
            let mut counts = [0usize; 16];
            for &x in &source {
                counts[apply_rows(&rows, x) as usize] += 1;
            }
            total += 0.5 * counts.iter().map(|&c| (c as f64 / 1024.0 - 1.0 / 16.0).abs()).sum::<f64>();
        }
        let tv = total / spec.seed_count() as f64;
        assert!(tv <= 0.1, "average TV {tv}");
    }
}
