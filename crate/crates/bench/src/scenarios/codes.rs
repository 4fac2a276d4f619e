use anyhow::Result;
use nastynoise::codes::{
    bitflip_list_decode, erasure_list_decode, gen_random_code, low_weight_codewords, Codeword, GeneratorMatrix,
    ReceivedWord,
};
use rand::Rng;

use super::{b2f, par_trials};
use crate::config::ExperimentConfig;
use crate::report::{Record, TrialReport};

/// Codeword bit `j` as the parity of column `j` restricted to the message.
fn column_encode(g: &GeneratorMatrix, msg: u64) -> u64 {
    (0..g.width()).fold(0, |acc, j| {
        let parity = g.rows().iter().enumerate().filter(|(i, row)| msg >> i & 1 == 1 && *row >> j & 1 == 1).count();
        acc | ((parity as u64) & 1) << j
    })
}

fn patterns(w: usize, max_erased: usize) -> Vec<u64> {
    (0u64..1 << w).filter(|m| m.count_ones() as usize <= max_erased).collect()
}

struct Counts {
    erasure_cases: usize,
    erasure_failures: usize,
    bitflip_cases: usize,
    bitflip_failures: usize,
    lowweight_cases: usize,
    lowweight_failures: usize,
}

fn erasure_round_trip(g: &GeneratorMatrix, erasure_patterns: &[u64]) -> Result<(usize, usize)> {
    let k = g.message_bits();
    let book: Vec<u64> = (0..1u64 << k).map(|m| column_encode(g, m)).collect();
    let (mut cases, mut failures) = (0, 0);
    for (msg, &bits) in book.iter().enumerate() {
        let c = Codeword { bits, width: g.width() };
        for &erased in erasure_patterns {
            let r = ReceivedWord::erase(&c, erased);
            let expected: Vec<u64> = (0..1u64 << k).filter(|&m| r.agrees_with(&Codeword { bits: book[m as usize], width: g.width() })).collect();
            let got = erasure_list_decode(g, &r, 1 << k)?;
            cases += 1;
            failures += usize::from(got != expected || !got.contains(&(msg as u64)));
        }
    }
    Ok((cases, failures))
}

fn bitflip_oracle(g: &GeneratorMatrix, r: &Codeword, radius: usize) -> Vec<u64> {
    (0..1u64 << g.message_bits()).filter(|&m| (column_encode(g, m) ^ r.bits).count_ones() as usize <= radius).collect()
}

/// Low-weight codewords found by scanning every light word and testing
/// membership with a fully known erasure decode.
fn lowweight_by_membership(g: &GeneratorMatrix, bound: usize) -> Result<usize> {
    let mut count = 0;
    for bits in 0u64..1 << g.width() {
        if bits.count_ones() as usize <= bound {
            let r = ReceivedWord::from_codeword(&Codeword { bits, width: g.width() });
            count += usize::from(!erasure_list_decode(g, &r, 1)?.is_empty());
        }
    }
    Ok(count)
}

pub fn suite(cfg: &ExperimentConfig) -> Result<TrialReport> {
    let p = cfg.reader();
    let w = p.usize("w", 12)?;
    let k = p.usize("k", 4)?;
    let tau = p.f64("tau", 0.5)?;
    let max_flip_width = p.usize("max_flip_width", 10)?;
    p.finish()?;
    anyhow::ensure!(w <= 16 && k <= w, "erasure sweep needs k <= w <= 16");
    anyhow::ensure!((3..=12).contains(&max_flip_width), "max_flip_width must lie in 3..=12");
    let max_erased = (tau * w as f64).floor() as usize;
    let erasure_patterns = patterns(w, max_erased);

    let records = par_trials(cfg, |_, h| {
        let mut rng = h.rng();
        let g = gen_random_code(k, w, &mut rng)?;
        let (erasure_cases, erasure_failures) = erasure_round_trip(&g, &erasure_patterns)?;

        let (mut bitflip_cases, mut bitflip_failures) = (0, 0);
        let (mut lowweight_cases, mut lowweight_failures) = (0, 0);
        for fw in 3..=max_flip_width {
            let fk = rng.gen_range(1..=fw.min(6));
            let fg = gen_random_code(fk, fw, &mut rng)?;
            for _ in 0..4 {
                let r = Codeword { bits: rng.gen::<u64>() & ((1 << fw) - 1), width: fw };
                for radius in 0..=fw {
                    bitflip_cases += 1;
                    let got = bitflip_list_decode(&fg, &r, radius, 1 << fk)?;
                    bitflip_failures += usize::from(got != bitflip_oracle(&fg, &r, radius));
                }
            }
            for bound in 0..=fw {
                lowweight_cases += 1;
                let direct = low_weight_codewords(&fg, bound)?;
                let sorted = direct.windows(2).all(|p| p[0] != p[1]);
                lowweight_failures +=
                    usize::from(!sorted || direct.len() != lowweight_by_membership(&fg, bound)?);
            }
        }
        let counts = Counts {
            erasure_cases,
            erasure_failures,
            bitflip_cases,
            bitflip_failures,
            lowweight_cases,
            lowweight_failures,
        };
        let mut r = Record::new();
        r.insert("erasure_cases".into(), counts.erasure_cases as f64);
        r.insert("erasure_failures".into(), counts.erasure_failures as f64);
        r.insert("bitflip_cases".into(), counts.bitflip_cases as f64);
        r.insert("bitflip_failures".into(), counts.bitflip_failures as f64);
        r.insert("lowweight_cases".into(), counts.lowweight_cases as f64);
        r.insert("lowweight_failures".into(), counts.lowweight_failures as f64);
        r.insert(
            "ok".into(),
            b2f(counts.erasure_failures + counts.bitflip_failures + counts.lowweight_failures == 0),
        );
        Ok(r)
    })?;

    let sum = |key: &str| records.iter().map(|r| r[key]).sum::<f64>() as usize;
    let mut report = TrialReport::new(cfg);
    for key in ["erasure", "bitflip", "lowweight"] {
        report.aggregate(&format!("{key}_cases"), sum(&format!("{key}_cases")) as f64);
        report.flag(&format!("{key}_failures"), sum(&format!("{key}_failures")));
    }
    report.aggregate("erasure_patterns", erasure_patterns.len() as f64);
    let failures = sum("erasure_failures") + sum("bitflip_failures") + sum("lowweight_failures");
    report.verdict(
        5,
        "erasure round trip, bit-flip decoding and low-weight enumeration agree with independent oracles",
        failures == 0,
        format!(
            "{} codes; {} erasure cases (<= {max_erased} of {w} erased), {} bit-flip cases, {} low-weight counts; {failures} mismatches",
            records.len(),
            sum("erasure_cases"),
            sum("bitflip_cases"),
            sum("lowweight_cases")
        ),
    );
    report.records = records;
    Ok(report)
}
