use rand::Rng as _;

use crate::alignment::enumerate_alignments;
use crate::bitstring::BitString;
use crate::channel::ChannelSample;
use crate::dp::edit_distance_cost;
use crate::error::Result;
use crate::pipeline::edit_distance_fast;
use crate::rng::{derive_seed, seeded_rng};

use super::{Outcome, SuiteConfig};

/// Largest length the oracle suite compares against full DP.
pub const ORACLE_MAX_N: usize = 1 << 14;

/// Largest length at which the oracle suite also enumerates alignments.
pub(crate) const ENUMERATION_MAX_N: usize = 8;

pub(crate) fn fast_vs_full(cfg: &SuiteConfig, seed: u64) -> Result<Outcome> {
    let sample = ChannelSample::draw(cfg.n, &cfg.params, seed)?;
    let (a, b) = (sample.s1.to_symbols(), sample.s2.to_symbols());
    let full = edit_distance_cost(&a, &b);
    let fast = edit_distance_fast(&a, &b, &cfg.pipeline)?.cost;
    Ok(Outcome::new(fast as f64 - full as f64, Some(0.0), fast != full))
}

pub(crate) fn full_vs_enumeration(cfg: &SuiteConfig, seed: u64) -> Result<Outcome> {
    let mut rng = seeded_rng(seed);
    let n1 = rng.random_range(0..=cfg.n);
    let n2 = rng.random_range(0..=cfg.n);
    let a = BitString::random(n1, derive_seed(seed, 1)).to_symbols();
    let b = BitString::random(n2, derive_seed(seed, 2)).to_symbols();
    let full = edit_distance_cost(&a, &b);
    let mut best = usize::MAX;
    for path in enumerate_alignments(n1, n2)? {
        best = best.min(path.cost(&a, &b)?);
    }
    Ok(Outcome::new(full as f64 - best as f64, Some(0.0), full != best))
}
