use std::collections::HashMap;

use anyhow::Result;
use nastynoise::learn::{ice_filter, multiset};
use nastynoise::{Label, LabeledExample, Sample};
use rand::Rng;

use super::{b2f, par_trials};
use crate::config::ExperimentConfig;
use crate::report::{Record, TrialReport};

#[derive(Default)]
struct Checks {
    idempotent: bool,
    contradiction_free: bool,
    even_drop: bool,
    permutation_invariant: bool,
}

impl Checks {
    fn all(&self) -> bool {
        self.idempotent && self.contradiction_free && self.even_drop && self.permutation_invariant
    }
}

/// What ICE must return, computed from net label counts alone.
fn oracle(s: &Sample) -> HashMap<LabeledExample, usize> {
    let mut net: HashMap<usize, i64> = HashMap::new();
    for e in s {
        *net.entry(e.point.0).or_default() += e.label.sign() as i64;
    }
    net.into_iter()
        .filter(|&(_, d)| d != 0)
        .map(|(x, d)| (LabeledExample::new(x, Label::from_real(d as f64)), d.unsigned_abs() as usize))
        .collect()
}

fn check(s: &Sample) -> Checks {
    let out = ice_filter(s);
    let mut reversed = s.clone().into_vec();
    reversed.reverse();
    let got = multiset(out.as_slice());
    Checks {
        idempotent: ice_filter(&out) == out,
        contradiction_free: out.iter().all(|e| !out.iter().any(|f| *f == e.contradiction())),
        even_drop: (s.len() - out.len()).is_multiple_of(2),
        permutation_invariant: got == oracle(s) && got == multiset(ice_filter(&Sample::from_vec(reversed)).as_slice()),
    }
}

pub fn unit(cfg: &ExperimentConfig) -> Result<TrialReport> {
    let p = cfg.reader();
    let len = p.usize("len", 12)?;
    let points = p.usize("points", 3)?.max(1);
    p.finish()?;
    let records = par_trials(cfg, |_, h| {
        let mut rng = h.rng();
        let s: Sample = (0..len).map(|_| LabeledExample::from_labeled_index(rng.gen_range(0..2 * points))).collect();
        let c = check(&s);
        let mut r = Record::new();
        r.insert("len_in".into(), s.len() as f64);
        r.insert("len_out".into(), ice_filter(&s).len() as f64);
        r.insert("ok".into(), b2f(c.all()));
        Ok(r)
    })?;
    let mut report = TrialReport::new(cfg);
    let failures = records.iter().filter(|r| r["ok"] == 0.0).count();
    report.flag("failures", failures);
    report.verdict(0, "ICE invariants on random samples", failures == 0, format!("{failures} failing trials"));
    report.records = records;
    Ok(report)
}

pub fn suite(cfg: &ExperimentConfig) -> Result<TrialReport> {
    let p = cfg.reader();
    let max_len = p.usize("max_len", 6)?;
    let points = p.usize("points", 3)?.max(1);
    p.finish()?;
    let symbols = 2 * points;
    let mut report = TrialReport::new(cfg);
    let mut total = 0usize;
    let mut failures = [0usize; 4];
    for len in 0..=max_len {
        let count = symbols.pow(len as u32);
        let mut failed = 0usize;
        for mut code in 0..count {
            let s: Sample = (0..len)
                .map(|_| {
                    let e = LabeledExample::from_labeled_index(code % symbols);
                    code /= symbols;
                    e
                })
                .collect();
            let c = check(&s);
            for (slot, ok) in [c.idempotent, c.contradiction_free, c.even_drop, c.permutation_invariant].iter().enumerate() {
                failures[slot] += usize::from(!ok);
            }
            failed += usize::from(!c.all());
        }
        total += count;
        let mut r = Record::new();
        r.insert("len".into(), len as f64);
        r.insert("samples".into(), count as f64);
        r.insert("failures".into(), failed as f64);
        report.records.push(r);
    }
    for (name, f) in ["idempotence", "contradiction", "even_drop", "permutation"].iter().zip(failures) {
        report.flag(&format!("{name}_failures"), f);
    }
    report.aggregate("samples", total as f64);
    let bad: usize = failures.iter().sum();
    report.verdict(
        1,
        "ICE idempotent, contradiction-free, even drop, permutation invariant",
        bad == 0,
        format!("{total} samples, {bad} violations"),
    );
    Ok(report)
}
