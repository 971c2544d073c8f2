use rand::Rng as _;
use rand_distr::{Binomial, Distribution, Geometric};

use crate::bitstring::BitString;
use crate::channel::{apply_channel, ChannelSample};
use crate::dp::edit_distance_cost;
use crate::error::{Error, Result};
use crate::params::ln_n;
use crate::rng::{derive_seed, seeded_rng, Rng};

use super::{stats, CountKind, Outcome, SuiteConfig};

pub(crate) fn channel_count(cfg: &SuiteConfig, kind: CountKind, seed: u64) -> Result<Outcome> {
    // counts do not depend on the source bits
    let (_, trace) = apply_channel(&BitString::zeros(cfg.n), &cfg.params, seed)?;
    let c = trace.counts();
    let x = match kind {
        CountKind::Substitutions => c.substitutions,
        CountKind::Deletions => c.deletions,
        CountKind::InsertionEvents => c.insertion_events,
        CountKind::InsertedBits => c.inserted_bits,
    } as f64;
    let (mean, var) = stats::count_moments(kind, cfg.n, &cfg.params);
    let band = 3.0 * var.sqrt();
    Ok(Outcome::new(x, Some(band), (x - mean).abs() > band))
}

pub(crate) fn chained_nbinom(t: usize, p: f64, q: f64, k: f64, seed: u64) -> Result<Outcome> {
    let bad = |e: String| Error::InvalidArgument(e);
    let mut rng = seeded_rng(seed);
    let m = Binomial::new(t as u64, p).map_err(|e| bad(e.to_string()))?.sample(&mut rng);
    let geo = Geometric::new(q).map_err(|e| bad(e.to_string()))?;
    // trials up to and including the m-th success
    let x: u64 = (0..m).map(|_| geo.sample(&mut rng) + 1).sum();
    let threshold = k * t as f64 * p / q;
    Ok(Outcome::new(x as f64, Some(threshold), x as f64 >= threshold))
}

/// A channel sample and a block start `i` with room for a full block.
struct BlockSetup {
    sample: ChannelSample,
    f: Vec<usize>,
    len: usize,
    i: usize,
    rng: Rng,
}

fn block_setup(cfg: &SuiteConfig, seed: u64) -> Result<Option<BlockSetup>> {
    let len = cfg.bounds().block_len(cfg.n);
    if cfg.n <= len {
        return Ok(None);
    }
    let sample = ChannelSample::draw(cfg.n, &cfg.params, seed)?;
    let f = sample.trace.canonical_function();
    let mut rng = seeded_rng(derive_seed(seed, 2));
    let i = rng.random_range(0..cfg.n - len);
    Ok(Some(BlockSetup { sample, f, len, i, rng }))
}

pub(crate) fn block_distance(cfg: &SuiteConfig, seed: u64) -> Result<Outcome> {
    let Some(s) = block_setup(cfg, seed)? else {
        return Ok(Outcome::skipped());
    };
    let b = cfg.bounds();
    let threshold = 1.5 * (b.rho_s + b.kappa(cfg.n)) * b.k_ln_n(cfg.n);
    let s1 = s.sample.s1.to_symbols();
    let s2 = s.sample.s2.to_symbols();
    let d = edit_distance_cost(&s1[s.i..s.i + s.len], &s2[s.f[s.i]..s.f[s.i + s.len]]) as f64;
    Ok(Outcome::new(d, Some(threshold), d >= threshold))
}

pub(crate) fn local_shift(cfg: &SuiteConfig, seed: u64) -> Result<Outcome> {
    let Some(s) = block_setup(cfg, seed)? else {
        return Ok(Outcome::skipped());
    };
    let b = cfg.bounds();
    let threshold = 1.5 * b.kappa(cfg.n) * b.k_ln_n(cfg.n);
    let shift = (s.f[s.i + s.len] as f64 - s.f[s.i] as f64 - s.len as f64).abs();
    Ok(Outcome::new(shift, Some(threshold), shift > threshold))
}

pub(crate) fn random_window(cfg: &SuiteConfig, d: usize, seed: u64) -> Result<Outcome> {
    let len = cfg.bounds().block_len(cfg.n);
    let a = BitString::random(len, derive_seed(seed, 0)).to_symbols();
    let b = BitString::random(len, derive_seed(seed, 1)).to_symbols();
    let dist = edit_distance_cost(&a, &b);
    Ok(Outcome::new(dist as f64, Some(d as f64), dist <= d))
}

fn window_score(s: &BlockSetup, i2: usize) -> f64 {
    let s1 = s.sample.s1.to_symbols();
    let s2 = s.sample.s2.to_symbols();
    edit_distance_cost(&s1[s.i..s.i + s.len], &s2[i2..i2 + s.len]) as f64
}

pub(crate) fn near_window(cfg: &SuiteConfig, seed: u64) -> Result<Outcome> {
    let Some(mut s) = block_setup(cfg, seed)? else {
        return Ok(Outcome::skipped());
    };
    let n2 = s.sample.s2.len();
    if n2 < s.len {
        return Ok(Outcome::skipped());
    }
    let h = ln_n(cfg.n).floor() as i64;
    let delta = s.rng.random_range(-h..=h);
    let i2 = (s.f[s.i] as i64 + delta).clamp(0, (n2 - s.len) as i64) as usize;
    let threshold = cfg.separation_ratio * cfg.bounds().k_ln_n(cfg.n);
    let score = window_score(&s, i2);
    Ok(Outcome::new(score, Some(threshold), score > threshold))
}

pub(crate) fn far_window(cfg: &SuiteConfig, seed: u64) -> Result<Outcome> {
    let Some(mut s) = block_setup(cfg, seed)? else {
        return Ok(Outcome::skipped());
    };
    let n2 = s.sample.s2.len();
    if n2 < s.len {
        return Ok(Outcome::skipped());
    }
    let b = cfg.bounds();
    let tolerance = (1.5 * b.kappa(cfg.n) + 1.0) * b.k_ln_n(cfg.n);
    let centre = s.f[s.i] as f64;
    let mut pick = None;
    for _ in 0..1000 {
        let i2 = s.rng.random_range(0..=n2 - s.len);
        if (i2 as f64 - centre).abs() > tolerance {
            pick = Some(i2);
            break;
        }
    }
    let Some(i2) = pick else {
        return Ok(Outcome::skipped());
    };
    let threshold = cfg.separation_ratio * b.k_ln_n(cfg.n);
    let score = window_score(&s, i2);
    Ok(Outcome::new(score, Some(threshold), score <= threshold))
}
