//! The indel channel: source sampling, mutation, replay and the canonical
//! alignment induced by a realized edit trace.
//!
//! Per source bit `b_j`, independently of everything else except the
//! previous bit's deletion flag:
//!
//! * substitution with probability `p_s`;
//! * deletion with probability `p_d`, or `q_d` when `b_{j-1}` was deleted
//!   (the first bit always uses `p_d`);
//! * with probability `p_i`, a uniformly random run of length
//!   `I ~ Geometric(1 - q_i)` on `{1, 2, ...}` inserted to the right of `b_j`.
//!
//! Inserted bits are never mutated further. A substitution on a deleted bit
//! is recorded in the trace but has no effect on the output.

use rand::Rng as _;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::alignment::{Alignment, Vertex};
use crate::bitstring::BitString;
use crate::error::{Error, Result};
use crate::params::ChannelParams;
use crate::rng::seeded_rng;

/// Channel outcome for one source bit.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EditRecord {
    pub sub: bool,
    pub del: bool,
    /// Payload inserted to the right of this bit (possibly empty).
    pub ins: BitString,
}

/// The realized edit set, one record per source bit in source order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EditTrace {
    pub records: Vec<EditRecord>,
}

/// Aggregate counts of a trace.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceCounts {
    pub substitutions: usize,
    /// Substitutions on bits that survive deletion.
    pub effective_substitutions: usize,
    pub deletions: usize,
    pub insertion_events: usize,
    pub inserted_bits: usize,
}

impl EditTrace {
    /// The identity trace on `n` bits.
    pub fn identity(n: usize) -> Self {
        EditTrace {
            records: vec![EditRecord::default(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn counts(&self) -> TraceCounts {
        let mut c = TraceCounts::default();
        for r in &self.records {
            c.substitutions += usize::from(r.sub);
            c.effective_substitutions += usize::from(r.sub && !r.del);
            c.deletions += usize::from(r.del);
            c.insertion_events += usize::from(!r.ins.is_empty());
            c.inserted_bits += r.ins.len();
        }
        c
    }

    /// Length of the string the trace produces.
    pub fn output_len(&self) -> usize {
        self.records
            .iter()
            .map(|r| usize::from(!r.del) + r.ins.len())
            .sum()
    }

    /// Apply the trace to `s1`.
    pub fn replay(&self, s1: &BitString) -> Result<BitString> {
        if s1.len() != self.len() {
            return Err(Error::Inconsistent(format!(
                "trace has {} records but the source has {} bits",
                self.len(),
                s1.len()
            )));
        }
        let mut out = BitString::with_capacity(self.output_len());
        for (j, r) in self.records.iter().enumerate() {
            if !r.del {
                out.push(s1.get(j) ^ r.sub);
            }
            out.extend_from(&r.ins);
        }
        Ok(out)
    }

    /// `f_{A*}(i)` for every row, without materializing the path.
    pub fn canonical_function(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut col = 0;
        let mut pending_ins = 0;
        out.push(0);
        for r in &self.records {
            col += pending_ins + usize::from(!r.del);
            pending_ins = r.ins.len();
            out.push(col);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let wire: Vec<WireRecord> = self
            .records
            .iter()
            .enumerate()
            .map(|(j, r)| WireRecord {
                pos: j + 1,
                sub: r.sub,
                del: r.del,
                ins: r.ins.to_string(),
            })
            .collect();
        Ok(serde_json::to_string_pretty(&wire)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: Vec<WireRecord> = serde_json::from_str(text)?;
        let mut records = Vec::with_capacity(wire.len());
        for (j, w) in wire.into_iter().enumerate() {
            if w.pos != j + 1 {
                return Err(Error::Parse(format!(
                    "trace record {j} has pos {} (expected {})",
                    w.pos,
                    j + 1
                )));
            }
            records.push(EditRecord {
                sub: w.sub,
                del: w.del,
                ins: w.ins.parse()?,
            });
        }
        Ok(EditTrace { records })
    }
}

/// On-disk trace record; positions are 1-indexed.
#[derive(Serialize, Deserialize)]
struct WireRecord {
    pos: usize,
    sub: bool,
    del: bool,
    ins: String,
}

/// Uniformly random source string of length `n`.
pub fn sample_source(n: usize, seed: u64) -> BitString {
    BitString::random(n, seed)
}

/// Pass `s1` through the channel. Returns the mutated string and the trace
/// that produced it.
pub fn apply_channel(s1: &BitString, params: &ChannelParams, seed: u64) -> Result<(BitString, EditTrace)> {
    params.validate()?;
    let mut rng = seeded_rng(seed);
    let ins_len = (params.p_i > 0.0)
        .then(|| Geometric::new(1.0 - params.q_i))
        .transpose()
        .map_err(|e| Error::InvalidParams(format!("insertion length distribution: {e}")))?;

    let mut records = Vec::with_capacity(s1.len());
    let mut prev_deleted = false;
    for _ in 0..s1.len() {
        let sub = rng.random_bool(params.p_s);
        let del = rng.random_bool(if prev_deleted { params.q_d } else { params.p_d });
        let mut ins = BitString::new();
        if let Some(geo) = &ins_len {
            if rng.random_bool(params.p_i) {
                // rand_distr counts failures before the first success
                let len = geo.sample(&mut rng) as usize + 1;
                for _ in 0..len {
                    ins.push(rng.random());
                }
            }
        }
        prev_deleted = del;
        records.push(EditRecord { sub, del, ins });
    }
    let trace = EditTrace { records };
    let s2 = trace.replay(s1)?;
    Ok((s2, trace))
}

/// The alignment induced by `trace`.
///
/// Row `i` is entered at `(i, f(i))`. The run inserted to the right of bit
/// `i-1` is laid out first as horizontal edges in row `i`; bit `i` then
/// leaves the row by a vertical edge if deleted or a diagonal edge if it
/// survives. The path therefore aligns every surviving bit with its own
/// descendant, and its cost equals the number of realized edits.
pub fn canonical_alignment(trace: &EditTrace, n1: usize, n2: usize) -> Result<Alignment> {
    if trace.len() != n1 {
        return Err(Error::Inconsistent(format!(
            "trace has {} records but n1 = {n1}",
            trace.len()
        )));
    }
    if trace.output_len() != n2 {
        return Err(Error::Inconsistent(format!(
            "trace produces {} bits but n2 = {n2}",
            trace.output_len()
        )));
    }
    let mut v: Vec<Vertex> = Vec::with_capacity(n1 + n2 + 1);
    let (mut i, mut j) = (0, 0);
    v.push((0, 0));
    let mut pending_ins = 0;
    for r in &trace.records {
        for _ in 0..pending_ins {
            j += 1;
            v.push((i, j));
        }
        i += 1;
        if !r.del {
            j += 1;
        }
        v.push((i, j));
        pending_ins = r.ins.len();
    }
    for _ in 0..pending_ins {
        j += 1;
        v.push((i, j));
    }
    Ok(Alignment::from_vertices_unchecked(v))
}

/// A sampled instance: source, mutated string and trace.
#[derive(Debug, Clone)]
pub struct ChannelSample {
    pub s1: BitString,
    pub s2: BitString,
    pub trace: EditTrace,
}

impl ChannelSample {
    /// Draw `(s1, s2, trace)` with independent source and channel streams
    /// derived from `seed`.
    pub fn draw(n: usize, params: &ChannelParams, seed: u64) -> Result<Self> {
        let s1 = sample_source(n, crate::rng::derive_seed(seed, 0));
        let (s2, trace) = apply_channel(&s1, params, crate::rng::derive_seed(seed, 1))?;
        Ok(ChannelSample { s1, s2, trace })
    }

    pub fn canonical(&self) -> Alignment {
        canonical_alignment(&self.trace, self.s1.len(), self.s2.len()).expect("trace replays to s2")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(sub: bool, del: bool, ins: &str) -> EditRecord {
        EditRecord {
            sub,
            del,
            ins: ins.parse().unwrap(),
        }
    }

    #[test]
    fn zero_length_source() {
        assert!(sample_source(0, 3).is_empty());
    }

    #[test]
    fn source_is_deterministic() {
        assert_eq!(sample_source(1000, 5), sample_source(1000, 5));
    }

    #[test]
    fn identity_channel() {
        let s1 = sample_source(500, 1);
        let (s2, trace) = apply_channel(&s1, &ChannelParams::zero(), 2).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(trace, EditTrace::identity(500));
        assert_eq!(canonical_alignment(&trace, 500, 500).unwrap(), Alignment::diagonal(500));
    }

    #[test]
    fn full_deletion() {
        let s1 = sample_source(300, 1);
        let p = ChannelParams::new(0.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        let (s2, trace) = apply_channel(&s1, &p, 2).unwrap();
        assert!(s2.is_empty());
        assert!(trace.records.iter().all(|r| r.del));
    }

    #[test]
    fn channel_is_deterministic() {
        let s1 = sample_source(2000, 1);
        let p = ChannelParams::new(0.05, 0.05, 0.3, 0.05, 0.4).unwrap();
        let a = apply_channel(&s1, &p, 77).unwrap();
        let b = apply_channel(&s1, &p, 77).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn canonical_single_deletion() {
        let trace = EditTrace {
            records: vec![rec(false, true, ""), rec(false, false, "")],
        };
        let a = canonical_alignment(&trace, 2, 1).unwrap();
        assert_eq!(a.vertices(), &[(0, 0), (1, 0), (2, 1)]);
    }

    #[test]
    fn canonical_insertion_layout() {
        // bit 0 carries a 2-bit insertion, bit 1 is deleted and carries 1 bit
        let trace = EditTrace {
            records: vec![rec(false, false, "10"), rec(false, true, "1"), rec(false, false, "")],
        };
        let a = canonical_alignment(&trace, 3, trace.output_len()).unwrap();
        assert_eq!(
            a.vertices(),
            &[(0, 0), (1, 1), (1, 2), (1, 3), (2, 3), (2, 4), (3, 5)]
        );
        assert_eq!(a.alignment_function_table(), trace.canonical_function());
        let s1: BitString = "011".parse().unwrap();
        let s2 = trace.replay(&s1).unwrap();
        assert_eq!(s2.to_string(), "01011");
        assert_eq!(a.cost(&s1.to_symbols(), &s2.to_symbols()).unwrap(), 4);
    }

    #[test]
    fn canonical_rejects_inconsistent_lengths() {
        let trace = EditTrace::identity(3);
        assert!(canonical_alignment(&trace, 4, 3).is_err());
        assert!(canonical_alignment(&trace, 3, 2).is_err());
        assert!(trace.replay(&BitString::zeros(2)).is_err());
    }

    #[test]
    fn trace_json_round_trip() {
        let trace = EditTrace {
            records: vec![rec(true, false, ""), rec(false, true, "0110")],
        };
        let json = trace.to_json().unwrap();
        assert!(json.contains("\"pos\": 1"));
        assert_eq!(EditTrace::from_json(&json).unwrap(), trace);
        assert!(EditTrace::from_json(r#"[{"pos":2,"sub":false,"del":false,"ins":""}]"#).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn canonical_cost_counts_edits(seed in any::<u64>(), ps in 0.0..0.3f64, pd in 0.0..0.3f64,
                                        extra in 0.0..0.5f64, pi in 0.0..0.3f64, qi in 0.0..0.8f64) {
            let qd = (pd + extra).min(0.95);
            let p = ChannelParams::new(ps, pd, qd, pi, qi).unwrap();
            let sample = ChannelSample::draw(64, &p, seed).unwrap();
            let a = sample.canonical();
            let c = sample.trace.counts();
            let cost = a.cost(&sample.s1.to_symbols(), &sample.s2.to_symbols()).unwrap();
            prop_assert_eq!(cost, c.effective_substitutions + c.deletions + c.inserted_bits);
        }

        #[test]
        fn canonical_function_increments(seed in any::<u64>(), pd in 0.0..0.4f64, pi in 0.0..0.4f64) {
            let p = ChannelParams::new(0.1, pd, (pd + 0.2).min(0.9), pi, 0.5).unwrap();
            let sample = ChannelSample::draw(64, &p, seed).unwrap();
            let f = sample.canonical().alignment_function_table();
            prop_assert_eq!(&f, &sample.trace.canonical_function());
            for i in 0..64 {
                let r = &sample.trace.records[i];
                let prev_ins = if i == 0 { 0 } else { sample.trace.records[i - 1].ins.len() };
                prop_assert_eq!(f[i + 1] - f[i], usize::from(!r.del) + prev_ins);
            }
        }
    }
}
