//! Binary linear codes.
//!
//! A generator matrix has `k` rows of `w` bits each, stored as `u64` bitsets
//! with coordinate `j` in bit `j`. Messages are `k`-bit integers with message
//! bit `i` selecting row `i`. In the sign view `+1` is zero and `-1` is one,
//! so the Hamming weight of a codeword is its number of `-1` coordinates.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::Label;
use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::stats::binary_entropy;

/// Widest supported codeword.
pub const MAX_WIDTH: usize = 64;
/// Largest message length that may be enumerated.
pub const MAX_ENUMERABLE_BITS: usize = 24;
/// Default cap on list sizes.
pub const DEFAULT_LIST_CAP: usize = 64;

const REGENERATION_ATTEMPTS: usize = 100;

fn mask(w: usize) -> u64 {
    if w == 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

/// A `k x w` generator matrix over GF(2) with full row rank.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorMatrix {
    rows: Vec<u64>,
    width: usize,
}

impl GeneratorMatrix {
    pub fn new(rows: Vec<u64>, width: usize) -> Result<Self> {
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::InvalidParameter(format!("width {width} outside 1..={MAX_WIDTH}")));
        }
        if rows.is_empty() || rows.len() > width {
            return Err(Error::InvalidParameter(format!("{} rows for width {width}", rows.len())));
        }
        if rows.iter().any(|r| r & !mask(width) != 0) {
            return Err(Error::InvalidParameter("row has bits beyond the width".into()));
        }
        if rank(&rows) != rows.len() {
            return Err(Error::RankDeficient { attempts: 1 });
        }
        Ok(Self { rows, width })
    }

    /// The `[w, 1]` repetition code.
    pub fn repetition(width: usize) -> Result<Self> {
        Self::new(vec![mask(width.min(MAX_WIDTH))], width)
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// Codeword length `w`.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Message length `k`.
    pub fn message_bits(&self) -> usize {
        self.rows.len()
    }

    pub fn rate(&self) -> f64 {
        self.rows.len() as f64 / self.width as f64
    }

    fn check_message(&self, msg: u64) -> Result<()> {
        let k = self.message_bits();
        if k < 64 && msg >> k != 0 {
            return Err(Error::InvalidParameter(format!("message {msg:#x} longer than {k} bits")));
        }
        Ok(())
    }

    pub fn encode(&self, msg: u64) -> Result<Codeword> {
        self.check_message(msg)?;
        Ok(self.encode_unchecked(msg))
    }

    fn encode_unchecked(&self, msg: u64) -> Codeword {
        let mut bits = 0;
        let mut m = msg;
        while m != 0 {
            bits ^= self.rows[m.trailing_zeros() as usize];
            m &= m - 1;
        }
        Codeword { bits, width: self.width }
    }

    /// Encodes a sign-vector message.
    pub fn encode_signs(&self, msg: &[Label]) -> Result<Codeword> {
        if msg.len() != self.message_bits() {
            return Err(Error::InvalidParameter(format!(
                "message of {} symbols for {} message bits",
                msg.len(),
                self.message_bits()
            )));
        }
        self.encode(signs_to_bits(msg))
    }

    /// Every `(message, codeword)` pair, in Gray-code order.
    pub fn codebook(&self) -> Result<Vec<(u64, Codeword)>> {
        let k = self.message_bits();
        if k > MAX_ENUMERABLE_BITS {
            return Err(Error::InvalidParameter(format!("{k} message bits are too many to enumerate")));
        }
        let mut out = Vec::with_capacity(1 << k);
        let (mut msg, mut bits) = (0u64, 0u64);
        out.push((0, Codeword { bits: 0, width: self.width }));
        for step in 1u64..(1 << k) {
            let i = step.trailing_zeros() as usize;
            msg ^= 1 << i;
            bits ^= self.rows[i];
            out.push((msg, Codeword { bits, width: self.width }));
        }
        Ok(out)
    }

    /// Row-major hex text: a `w k` header line, then one hex row per line.
    pub fn to_hex_text(&self) -> String {
        let digits = self.width.div_ceil(4);
        let mut s = format!("{} {}\n", self.width, self.message_bits());
        for r in &self.rows {
            s.push_str(&format!("{r:0digits$x}\n"));
        }
        s
    }

    pub fn from_hex_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
        let mut parts = header.split_whitespace();
        let mut field = |name: &str| -> Result<usize> {
            parts
                .next()
                .ok_or_else(|| Error::Parse(format!("header lacks {name}")))?
                .parse()
                .map_err(|e| Error::Parse(format!("{name}: {e}")))
        };
        let width = field("width")?;
        let k = field("rows")?;
        let rows = lines
            .map(|l| u64::from_str_radix(l, 16).map_err(|e| Error::Parse(format!("row {l:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if rows.len() != k {
            return Err(Error::Parse(format!("header declares {k} rows, found {}", rows.len())));
        }
        Self::new(rows, width)
    }
}

impl fmt::Display for GeneratorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex_text())
    }
}

impl FromStr for GeneratorMatrix {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_hex_text(s)
    }
}

fn rank(rows: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for &r in rows {
        let mut v = r;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

pub fn signs_to_bits(signs: &[Label]) -> u64 {
    signs.iter().enumerate().fold(0, |acc, (i, l)| acc | (l.bit() as u64) << i)
}

pub fn bits_to_signs(bits: u64, len: usize) -> Vec<Label> {
    (0..len).map(|i| Label::from_bit(bits >> i & 1 == 1)).collect()
}

/// A codeword, or any `w`-bit word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Codeword {
    pub bits: u64,
    pub width: usize,
}

impl Codeword {
    pub fn from_signs(signs: &[Label]) -> Result<Self> {
        if signs.is_empty() || signs.len() > MAX_WIDTH {
            return Err(Error::InvalidParameter(format!("word of length {}", signs.len())));
        }
        Ok(Self { bits: signs_to_bits(signs), width: signs.len() })
    }

    pub fn symbol(&self, j: usize) -> Label {
        Label::from_bit(self.bits >> j & 1 == 1)
    }

    pub fn signs(&self) -> Vec<Label> {
        bits_to_signs(self.bits, self.width)
    }

    /// Number of `-1` coordinates.
    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn distance(&self, other: &Codeword) -> usize {
        (self.bits ^ other.bits).count_ones() as usize
    }

    /// Key ordering words lexicographically from coordinate 0, `+1` first.
    fn lex_key(&self) -> u64 {
        self.bits.reverse_bits() >> (64 - self.width)
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.signs() {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

/// A received word over `{-1, +1, ?}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReceivedWord {
    /// Bit `j` set when coordinate `j` is known.
    pub known: u64,
    /// Values of the known coordinates; zero elsewhere.
    pub bits: u64,
    pub width: usize,
}

impl ReceivedWord {
    pub fn from_symbols(symbols: &[Option<Label>]) -> Result<Self> {
        if symbols.is_empty() || symbols.len() > MAX_WIDTH {
            return Err(Error::InvalidParameter(format!("word of length {}", symbols.len())));
        }
        let (mut known, mut bits) = (0, 0);
        for (j, s) in symbols.iter().enumerate() {
            if let Some(l) = s {
                known |= 1 << j;
                bits |= (l.bit() as u64) << j;
            }
        }
        Ok(Self { known, bits, width: symbols.len() })
    }

    /// A fully known word.
    pub fn from_codeword(c: &Codeword) -> Self {
        Self { known: mask(c.width), bits: c.bits, width: c.width }
    }

    /// `c` with the coordinates in `erased` replaced by `?`.
    pub fn erase(c: &Codeword, erased: u64) -> Self {
        let known = mask(c.width) & !erased;
        Self { known, bits: c.bits & known, width: c.width }
    }

    pub fn symbols(&self) -> Vec<Option<Label>> {
        (0..self.width)
            .map(|j| (self.known >> j & 1 == 1).then(|| Label::from_bit(self.bits >> j & 1 == 1)))
            .collect()
    }

    pub fn erasures(&self) -> usize {
        self.width - (self.known & mask(self.width)).count_ones() as usize
    }

    pub fn agrees_with(&self, c: &Codeword) -> bool {
        (c.bits ^ self.bits) & self.known == 0
    }
}

impl fmt::Display for ReceivedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.symbols() {
            write!(f, "{}", s.map_or('?', Label::as_char))?;
        }
        Ok(())
    }
}

impl FromStr for ReceivedWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let symbols = s
            .trim()
            .chars()
            .map(|c| match c {
                '?' => Ok(None),
                c => Label::from_char(c).map(Some).ok_or_else(|| Error::Parse(format!("symbol {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_symbols(&symbols)
    }
}

fn check_width(g: &GeneratorMatrix, width: usize) -> Result<()> {
    if g.width() != width {
        return Err(Error::InvalidParameter(format!("word length {width} for code length {}", g.width())));
    }
    Ok(())
}

/// All messages whose codeword agrees with `r` on every known coordinate.
///
/// Solves the punctured system by Gaussian elimination and enumerates the
/// affine solution space. Fails when that space has more than `cap` points.
pub fn erasure_list_decode(g: &GeneratorMatrix, r: &ReceivedWord, cap: usize) -> Result<Vec<u64>> {
    check_width(g, r.width)?;
    let k = g.message_bits();
    // One equation per known coordinate j: sum_i m_i G[i][j] = r_j.
    // Reduced row echelon form: each row owns a pivot bit absent from the others.
    let mut pivots: Vec<(u32, u64, bool)> = Vec::new();
    for j in 0..g.width() {
        if r.known >> j & 1 == 0 {
            continue;
        }
        let mut coeff = g.rows().iter().enumerate().fold(0u64, |acc, (i, row)| acc | (row >> j & 1) << i);
        let mut rhs = r.bits >> j & 1 == 1;
        for &(p, pc, pr) in &pivots {
            if coeff >> p & 1 == 1 {
                coeff ^= pc;
                rhs ^= pr;
            }
        }
        if coeff == 0 {
            if rhs {
                return Ok(Vec::new());
            }
            continue;
        }
        let p = coeff.trailing_zeros();
        for (_, pc, pr) in pivots.iter_mut() {
            if *pc >> p & 1 == 1 {
                *pc ^= coeff;
                *pr ^= rhs;
            }
        }
        pivots.push((p, coeff, rhs));
    }
    let pivot_mask = pivots.iter().fold(0u64, |acc, &(p, _, _)| acc | 1 << p);
    let free: Vec<usize> = (0..k).filter(|i| pivot_mask >> i & 1 == 0).collect();
    let size = 1u128 << free.len();
    if size > cap as u128 {
        return Err(Error::ListTooLarge { size, cap });
    }
    let mut out = Vec::with_capacity(size as usize);
    for assignment in 0..size as u64 {
        let free_part = free.iter().enumerate().fold(0u64, |acc, (t, &i)| acc | (assignment >> t & 1) << i);
        let mut m = free_part;
        for &(p, pc, pr) in &pivots {
            let rest = (pc & free_part).count_ones() & 1 == 1;
            if pr ^ rest {
                m |= 1 << p;
            }
        }
        out.push(m);
    }
    out.sort_unstable();
    Ok(out)
}

/// All messages whose codeword lies within Hamming distance `radius` of `r`.
pub fn bitflip_list_decode(g: &GeneratorMatrix, r: &Codeword, radius: usize, cap: usize) -> Result<Vec<u64>> {
    check_width(g, r.width)?;
    let mut out = Vec::new();
    for (m, c) in g.codebook()? {
        if c.distance(r) <= radius {
            out.push(m);
            if out.len() > cap {
                return Err(Error::ListTooLarge { size: out.len() as u128, cap });
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Codewords of weight at most `bound`, sorted lexicographically with
/// coordinate 0 most significant and `+1` before `-1`.
pub fn low_weight_codewords(g: &GeneratorMatrix, bound: usize) -> Result<Vec<Codeword>> {
    let mut out: Vec<Codeword> = g.codebook()?.into_iter().map(|(_, c)| c).filter(|c| c.weight() <= bound).collect();
    out.sort_unstable_by_key(Codeword::lex_key);
    Ok(out)
}

/// A uniformly random full-rank `k x w` generator matrix.
pub fn gen_random_code(k: usize, w: usize, rng: &mut SimRng) -> Result<GeneratorMatrix> {
    if w == 0 || w > MAX_WIDTH || k == 0 || k > w {
        return Err(Error::InvalidParameter(format!("cannot build a [{w}, {k}] code")));
    }
    for _ in 0..REGENERATION_ATTEMPTS {
        let rows: Vec<u64> = (0..k).map(|_| rng.gen::<u64>() & mask(w)).collect();
        if rank(&rows) == k {
            return Ok(GeneratorMatrix { rows, width: w });
        }
    }
    Err(Error::RankDeficient { attempts: REGENERATION_ATTEMPTS })
}

/// A random full-rank code of rate `rho`; `rho w` must be a positive integer.
pub fn gen_random_linear_code(rho: f64, w: usize, rng: &mut SimRng) -> Result<GeneratorMatrix> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("rate {rho} outside (0, 1)")));
    }
    let k = rho * w as f64;
    if (k - k.round()).abs() > 1e-9 || k.round() < 1.0 {
        return Err(Error::InvalidParameter(format!("rho w = {k} is not a positive integer")));
    }
    gen_random_code(k.round() as usize, w, rng)
}

/// Code constants derived from the two noise rates of the separation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    pub rho: f64,
    /// Tolerated erasure fraction.
    pub tau: f64,
    /// Exponent of the low-weight subcode size.
    pub lambda: f64,
    /// Weight bound as a fraction of `w`.
    pub eta_n: f64,
    pub eta_m: f64,
    pub list_cap: usize,
}

impl CodeParams {
    /// `tau = 0.998 H + 0.002 q`, `rho = 1 - 0.999 H - 0.001 q`,
    /// `lambda = (rho + H - 1) / 2` with `H = H(eta_n)` and
    /// `q = eta_m / (1 - eta_m)`.
    pub fn derive(eta_n: f64, eta_m: f64) -> Result<Self> {
        let h = binary_entropy(eta_n);
        if !(eta_n > 0.0 && eta_n < eta_m && eta_m < 1.0 - 1.0 / (1.0 + h)) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < eta_n < eta_m < 1 - 1/(1 + H(eta_n)); got eta_n = {eta_n}, eta_m = {eta_m}"
            )));
        }
        let q = eta_m / (1.0 - eta_m);
        let tau = 0.998 * h + 0.002 * q;
        let rho = 1.0 - 0.999 * h - 0.001 * q;
        Ok(Self { rho, tau, lambda: (rho + h - 1.0) / 2.0, eta_n, eta_m, list_cap: DEFAULT_LIST_CAP })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngHandle;
    use crate::stats::within_sigmas;

    fn rng(seed: u64) -> SimRng {
        RngHandle::from_seed(seed).rng()
    }

    fn rw(s: &str) -> ReceivedWord {
        s.parse().unwrap()
    }

    #[test]
    fn repetition_erasure_examples() {
        let g = GeneratorMatrix::repetition(3).unwrap();
        assert_eq!(erasure_list_decode(&g, &rw("+??"), 8).unwrap(), vec![0]);
        assert_eq!(erasure_list_decode(&g, &rw("???"), 8).unwrap(), vec![0, 1]);
        assert!(erasure_list_decode(&g, &rw("+-?"), 8).unwrap().is_empty());
        assert!(matches!(erasure_list_decode(&g, &rw("???"), 1), Err(Error::ListTooLarge { .. })));
    }

    #[test]
    fn repetition_bitflip_examples() {
        let g = GeneratorMatrix::repetition(3).unwrap();
        let r = Codeword::from_signs(&[Label::Pos, Label::Pos, Label::Neg]).unwrap();
        assert_eq!(bitflip_list_decode(&g, &r, 1, 8).unwrap(), vec![0]);
        assert_eq!(bitflip_list_decode(&g, &r, 3, 8).unwrap(), vec![0, 1]);
        let c = g.encode(1).unwrap();
        assert_eq!(bitflip_list_decode(&g, &c, 0, 8).unwrap(), vec![1]);
    }

    #[test]
    fn encode_examples() {
        let g = gen_random_code(6, 12, &mut rng(1)).unwrap();
        assert_eq!(g.encode(0).unwrap().weight(), 0);
        for i in 0..6 {
            assert_eq!(g.encode(1 << i).unwrap().bits, g.rows()[i]);
        }
        let (a, b) = (0b101101, 0b011001);
        assert_eq!(g.encode(a ^ b).unwrap().bits, g.encode(a).unwrap().bits ^ g.encode(b).unwrap().bits);
        assert!(g.encode(1 << 6).is_err());
        assert!(g.encode_signs(&[Label::Pos; 5]).is_err());
    }

    #[test]
    fn gen_examples() {
        let g = gen_random_linear_code(1.0 / 3.0, 3, &mut rng(2)).unwrap();
        assert_eq!(g.message_bits(), 1);
        assert_ne!(g.rows()[0], 0);
        assert!(gen_random_linear_code(0.3, 16, &mut rng(2)).is_err());
        assert!(gen_random_linear_code(0.0, 16, &mut rng(2)).is_err());
        assert!(gen_random_code(3, 65, &mut rng(2)).is_err());

        let mut r = rng(3);
        let mut ones = 0u64;
        for _ in 0..500 {
            let g = gen_random_linear_code(0.5, 16, &mut r).unwrap();
            ones += g.rows().iter().map(|x| x.count_ones() as u64).sum::<u64>();
        }
        assert!(within_sigmas(ones as f64, 500 * 8 * 16, 0.5, 4.0));
    }

    #[test]
    fn low_weight_examples() {
        let g = gen_random_code(6, 12, &mut rng(4)).unwrap();
        let zero = low_weight_codewords(&g, 0).unwrap();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero[0].weight(), 0);
        assert_eq!(low_weight_codewords(&g, 12).unwrap().len(), 64);
        let all = low_weight_codewords(&g, 12).unwrap();
        for pair in all.windows(2) {
            assert!(pair[0].to_string() < pair[1].to_string());
        }
    }

    #[test]
    fn hex_roundtrip() {
        let g = gen_random_code(5, 13, &mut rng(5)).unwrap();
        let text = g.to_hex_text();
        assert_eq!(text.lines().next(), Some("13 5"));
        assert_eq!(GeneratorMatrix::from_hex_text(&text).unwrap(), g);
        assert!(GeneratorMatrix::from_hex_text("4 2\n3\n").is_err());
        assert!(matches!(GeneratorMatrix::from_hex_text("4 2\n3\n3\n"), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn code_params_identity() {
        let p = CodeParams::derive(0.01, 0.03).unwrap();
        let h = binary_entropy(0.01);
        assert!((p.lambda - (p.rho + h - 1.0) / 2.0).abs() < 1e-15);
        // tau + rho = 1 - 0.001 H + 0.001 q
        assert!((p.tau + p.rho - (1.0 - 0.001 * h + 0.001 * 0.03 / 0.97)).abs() < 1e-12);
        assert!(CodeParams::derive(0.05, 0.01).is_err());
    }

    #[test]
    fn received_word_text() {
        let r = rw("+-?+");
        assert_eq!(r.to_string(), "+-?+");
        assert_eq!(r.erasures(), 1);
        assert!("+x".parse::<ReceivedWord>().is_err());
    }
}
