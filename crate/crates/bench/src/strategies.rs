//! Generic adversaries selectable by name from a config.

use anyhow::{bail, Result};
use nastynoise::noise::{
    ContradictPairs, CopyClean, FlipEligible, FlipFirst, FlipRandom, NastyStrategy, Passive, RandomReplace,
    StrongMaliciousStrategy,
};
use nastynoise::DomainPoint;

pub const NASTY_IDS: &[&str] = &["passive", "flip-first", "flip-random", "random-replace"];
pub const STRONG_IDS: &[&str] = &["passive", "flip-eligible", "copy-clean", "contradict-pairs"];

pub fn nasty(id: &str, domain_size: usize) -> Result<Box<dyn NastyStrategy>> {
    Ok(match id {
        "passive" => Box::new(Passive),
        "flip-first" => Box::new(FlipFirst),
        "flip-random" => Box::new(FlipRandom),
        "random-replace" => Box::new(RandomReplace { domain_size }),
        _ => bail!("unknown nasty strategy {id:?}; known: {}", NASTY_IDS.join(", ")),
    })
}

pub fn strong(id: &str) -> Result<Box<dyn StrongMaliciousStrategy>> {
    Ok(match id {
        "passive" => Box::new(Passive),
        "flip-eligible" => Box::new(FlipEligible),
        "copy-clean" => Box::new(CopyClean),
        "contradict-pairs" => Box::new(ContradictPairs { point: DomainPoint(0) }),
        _ => bail!("unknown strong malicious strategy {id:?}; known: {}", STRONG_IDS.join(", ")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_resolves() {
        for id in NASTY_IDS {
            assert!(nasty(id, 4).is_ok());
        }
        for id in STRONG_IDS {
            assert!(strong(id).is_ok());
        }
        assert!(nasty("nope", 4).is_err());
    }
}
