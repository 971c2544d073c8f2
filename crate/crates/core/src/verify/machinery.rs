//! Break-replacement identities on alignments built by perturbing the
//! canonical alignment with random monotone detours.

use rand::seq::IndexedRandom as _;
use rand::Rng as _;

use crate::alignment::{enumerate_alignments, extract_breaks, lbr, sbr, Alignment, Break, PathIndex, Step, Vertex, ENUMERATION_LIMIT};
use crate::channel::ChannelSample;
use crate::error::Result;
use crate::params::{ln_n, ChannelParams};
use crate::rng::{derive_seed, seeded_rng, Rng};

use super::{Outcome, SuiteConfig};

/// Perturbed alignments examined per round-trip trial.
pub const PERTURBATIONS_PER_TRIAL: usize = 10;

/// High mutation rates, so that short instances still have edits to break
/// around.
pub fn machinery_params() -> ChannelParams {
    ChannelParams {
        p_s: 0.1,
        p_d: 0.08,
        q_d: 0.3,
        p_i: 0.08,
        q_i: 0.3,
    }
}

/// `max(2, ceil(ln n))`, so short and long breaks both occur at small `n`.
pub fn machinery_block_len(n: usize) -> usize {
    (ln_n(n).ceil() as usize).max(2)
}

/// A uniformly-stepped monotone path from `u` to `v`: every vertex after
/// `u`, ending with `v`.
pub fn random_detour_path(rng: &mut Rng, u: Vertex, v: Vertex) -> Vec<Vertex> {
    debug_assert!(u.0 <= v.0 && u.1 <= v.1);
    let mut out = Vec::with_capacity((v.0 - u.0) + (v.1 - u.1));
    let mut cur = u;
    while cur != v {
        let mut moves = Vec::with_capacity(3);
        if cur.0 < v.0 && cur.1 < v.1 {
            moves.push(Step::Diagonal);
        }
        if cur.0 < v.0 {
            moves.push(Step::Vertical);
        }
        if cur.1 < v.1 {
            moves.push(Step::Horizontal);
        }
        cur = moves.choose(rng).expect("a move toward v exists").apply(cur);
        out.push(cur);
    }
    out
}

/// `a_star` with one to three disjoint stretches replaced by random detours
/// spanning up to `3 block_len + 2` path positions.
fn perturb(a_star: &Alignment, rng: &mut Rng, block_len: usize) -> Alignment {
    let verts = a_star.vertices();
    let last = verts.len() - 1;
    let mut out = vec![verts[0]];
    let mut pos = 0;
    for _ in 0..rng.random_range(1..=3) {
        if pos >= last {
            break;
        }
        let start = rng.random_range(pos..last);
        let span = rng.random_range(1..=(3 * block_len + 2).min(last - start));
        let end = start + span;
        out.extend_from_slice(&verts[pos + 1..=start]);
        out.extend(random_detour_path(rng, verts[start], verts[end]));
        pos = end;
    }
    out.extend_from_slice(&verts[pos + 1..]);
    Alignment::from_vertices_unchecked(out)
}

/// `a` rerouted between up to three pairs of its canonical vertices whose
/// rows differ by less than `block_len`. Every break inside such a stretch
/// is short, so long breaks are untouched.
fn reroute(a: &Alignment, a_star: &Alignment, rng: &mut Rng, block_len: usize) -> Alignment {
    let index = PathIndex::new(a_star);
    let verts = a.vertices();
    let on: Vec<usize> = (0..verts.len()).filter(|&p| index.contains(verts[p])).collect();
    let mut out = vec![verts[0]];
    let mut pos = 0; // position in `verts` already emitted
    let mut k = 0; // index into `on` of the earliest admissible start
    for _ in 0..rng.random_range(1..=3) {
        if k + 1 >= on.len() {
            break;
        }
        let i = rng.random_range(k..on.len() - 1);
        let p = on[i];
        let reach = on[i + 1..]
            .iter()
            .take_while(|&&q| verts[q].0 - verts[p].0 < block_len)
            .count();
        if reach == 0 {
            k = i + 1;
            continue;
        }
        let j = i + 1 + rng.random_range(0..reach);
        let q = on[j];
        out.extend_from_slice(&verts[pos + 1..=p]);
        out.extend(random_detour_path(rng, verts[p], verts[q]));
        pos = q;
        k = j;
    }
    out.extend_from_slice(&verts[pos + 1..]);
    Alignment::from_vertices_unchecked(out)
}

fn long_breaks(a: &Alignment, a_star: &Alignment, block_len: usize) -> Vec<Break> {
    extract_breaks(a, a_star, block_len)
        .into_iter()
        .filter_map(|(b, long)| long.then_some(b))
        .collect()
}

struct Instance {
    s1: Vec<u8>,
    s2: Vec<u8>,
    a_star: Alignment,
    block_len: usize,
    rng: Rng,
}

fn instance(cfg: &SuiteConfig, seed: u64) -> Result<Instance> {
    let sample = ChannelSample::draw(cfg.n, &machinery_params(), seed)?;
    Ok(Instance {
        s1: sample.s1.to_symbols(),
        s2: sample.s2.to_symbols(),
        a_star: sample.canonical(),
        block_len: machinery_block_len(cfg.n),
        rng: seeded_rng(derive_seed(seed, 3)),
    })
}

pub(crate) fn sbr_lbr_round_trip(cfg: &SuiteConfig, seed: u64) -> Result<Outcome> {
    let mut inst = instance(cfg, seed)?;
    let mut violations = 0;
    for _ in 0..PERTURBATIONS_PER_TRIAL {
        let a = perturb(&inst.a_star, &mut inst.rng, inst.block_len);
        let restored = lbr(&sbr(&a, &inst.a_star, inst.block_len), &inst.a_star, inst.block_len);
        violations += usize::from(restored != inst.a_star);
    }
    let mut o = Outcome::new(violations as f64, Some(0.0), violations > 0);
    o.cases = PERTURBATIONS_PER_TRIAL;
    Ok(o)
}

pub(crate) fn shared_long_break_delta(cfg: &SuiteConfig, seed: u64) -> Result<Outcome> {
    let mut inst = instance(cfg, seed)?;
    let (a_star, l) = (&inst.a_star, inst.block_len);
    let a = perturb(a_star, &mut inst.rng, l);
    let b = reroute(&a, a_star, &mut inst.rng, l);
    let (la, lb) = (long_breaks(&a, a_star, l), long_breaks(&b, a_star, l));
    let same_long = la.len() == lb.len() && la.iter().zip(&lb).all(|(x, y)| x.same_route(y));
    let delta = |x: &Alignment| -> Result<i64> {
        Ok(lbr(x, a_star, l).cost(&inst.s1, &inst.s2)? as i64 - x.cost(&inst.s1, &inst.s2)? as i64)
    };
    let gap = (delta(&a)? - delta(&b)?).abs();
    Ok(Outcome::new(gap as f64, Some(0.0), !same_long || gap != 0))
}

pub(crate) fn good_minimum_is_global(cfg: &SuiteConfig, seed: u64) -> Result<Outcome> {
    let inst = instance(cfg, seed)?;
    let (n1, n2) = (inst.s1.len(), inst.s2.len());
    if n1 > ENUMERATION_LIMIT || n2 > ENUMERATION_LIMIT {
        return Ok(Outcome::skipped());
    }
    let (a_star, l) = (&inst.a_star, inst.block_len);
    let star_cost = a_star.cost(&inst.s1, &inst.s2)?;
    let (mut global, mut good, mut sbr_min) = (usize::MAX, usize::MAX, usize::MAX);
    for a in enumerate_alignments(n1, n2)? {
        let c = a.cost(&inst.s1, &inst.s2)?;
        global = global.min(c);
        let breaks = extract_breaks(&a, a_star, l);
        if breaks.iter().all(|(_, long)| !long) {
            good = good.min(c);
        }
        sbr_min = sbr_min.min(sbr(&a, a_star, l).cost(&inst.s1, &inst.s2)?);
    }
    let premise = sbr_min >= star_cost;
    Ok(Outcome::new(f64::from(u8::from(premise)), None, premise && good != global))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detour_reaches_target_monotonically() {
        let mut rng = seeded_rng(1);
        for _ in 0..100 {
            let p = random_detour_path(&mut rng, (2, 3), (7, 5));
            assert_eq!(*p.last().unwrap(), (7, 5));
            let mut full = vec![(2, 3)];
            full.extend(p);
            assert!(full.windows(2).all(|w| Step::between(w[0], w[1]).is_some()));
        }
        assert!(random_detour_path(&mut rng, (4, 4), (4, 4)).is_empty());
    }

    #[test]
    fn canonical_alignment_passes_every_identity() {
        let sample = ChannelSample::draw(30, &machinery_params(), 4).unwrap();
        let a_star = sample.canonical();
        let (s1, s2) = (sample.s1.to_symbols(), sample.s2.to_symbols());
        let l = machinery_block_len(30);
        assert!(extract_breaks(&a_star, &a_star, l).is_empty());
        assert_eq!(sbr(&a_star, &a_star, l), a_star);
        assert_eq!(lbr(&sbr(&a_star, &a_star, l), &a_star, l), a_star);
        let delta = lbr(&a_star, &a_star, l).cost(&s1, &s2).unwrap() as i64 - a_star.cost(&s1, &s2).unwrap() as i64;
        assert_eq!(delta, 0);
    }

    #[test]
    fn perturbations_are_valid_and_reroutes_keep_long_breaks() {
        let sample = ChannelSample::draw(40, &machinery_params(), 8).unwrap();
        let a_star = sample.canonical();
        let l = machinery_block_len(40);
        let mut rng = seeded_rng(2);
        let (mut saw_long, mut saw_short) = (false, false);
        for _ in 0..300 {
            let a = perturb(&a_star, &mut rng, l);
            Alignment::for_dims(a.vertices().to_vec(), a_star.n1(), a_star.n2()).unwrap();
            for (_, long) in extract_breaks(&a, &a_star, l) {
                saw_long |= long;
                saw_short |= !long;
            }
            let b = reroute(&a, &a_star, &mut rng, l);
            Alignment::for_dims(b.vertices().to_vec(), a_star.n1(), a_star.n2()).unwrap();
            let (la, lb) = (long_breaks(&a, &a_star, l), long_breaks(&b, &a_star, l));
            assert_eq!(la.len(), lb.len());
            assert!(la.iter().zip(&lb).all(|(x, y)| x.same_route(y)));
        }
        assert!(saw_long && saw_short);
    }
}
