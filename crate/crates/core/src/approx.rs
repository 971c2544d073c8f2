//! Block-anchored approximate alignment.
//!
//! The source is cut into blocks of `L = ceil(k ln n)` bits. The first block
//! is anchored at column 0. Each later block is compared, by exact edit
//! distance, against length-`L` windows of `s2` whose starts are spaced
//! `ln n` apart around "previous anchor + L"; the window with the smallest
//! distance becomes the block's anchor (ties go to the rightmost window).
//! Every window comparison is an `O(ln^2 n)` DP, and there are `O(1)` of
//! them per block, so the whole scan costs `O(n ln n)`.
//!
//! Window starts are clamped into `[0, |s2| - L]`, so every block scores
//! exactly `2J + 1` full-length windows. Only when `|s2| < L` are windows
//! truncated at the end of `s2`, and those shorter than `L/2` are skipped.

use serde::{Deserialize, Serialize};

use crate::alignment::Vertex;
use crate::dp::edit_distance_cost_into;
use crate::error::{Error, Result};
use crate::params::{ln_n, ParamBounds};

/// Sampled approximation `f'` of the canonical alignment function.
///
/// Rows and columns are 1-indexed bit positions: the sample `(1, 1)` says
/// bit 1 of `s1` sits at bit 1 of `s2`. Sample rows are `m * block_len + 1`
/// for `m = 0, 1, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorFunction {
    pub block_len: usize,
    pub samples: Vec<(usize, usize)>,
}

impl AnchorFunction {
    pub fn from_samples(block_len: usize, samples: Vec<(usize, usize)>) -> Result<Self> {
        if block_len == 0 {
            return Err(Error::InvalidArgument("block_len must be positive".into()));
        }
        for (m, &(row, col)) in samples.iter().enumerate() {
            if row != m * block_len + 1 {
                return Err(Error::InvalidArgument(format!(
                    "sample {m} is at row {row}, expected {}",
                    m * block_len + 1
                )));
            }
            if col == 0 {
                return Err(Error::InvalidArgument(format!("sample {m} has column 0")));
            }
        }
        Ok(AnchorFunction { block_len, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples as lattice vertices `(row - 1, col - 1)`.
    pub fn lattice_points(&self) -> Vec<Vertex> {
        self.samples.iter().map(|&(r, c)| (r - 1, c - 1)).collect()
    }

    /// `max |f'(i) - f(i)|` over sampled rows, where `f` is an alignment
    /// function indexed by lattice row.
    pub fn max_error(&self, f: &[usize]) -> usize {
        self.lattice_points()
            .iter()
            .map(|&(r, c)| c.abs_diff(f[r]))
            .max()
            .unwrap_or(0)
    }
}

/// Work counters for one scan.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ApproxStats {
    pub blocks: usize,
    pub windows_scored: usize,
    pub cells: usize,
    /// Blocks for which no window fit inside `s2`.
    pub carried_forward: usize,
}

/// `(floor(n / L) - 1) * (2J + 1) * L^2`: the window-DP cell count whenever
/// `|s2| >= L`.
pub fn predicted_cells(n: usize, bounds: &ParamBounds) -> usize {
    let l = bounds.block_len(n);
    let blocks = (n / l).saturating_sub(1);
    blocks * (2 * bounds.scan_halfwidth(n) + 1) * l * l
}

pub fn approx_align(s1: &[u8], s2: &[u8], bounds: &ParamBounds) -> Result<AnchorFunction> {
    approx_align_stats(s1, s2, bounds).map(|(f, _)| f)
}

pub fn approx_align_stats(s1: &[u8], s2: &[u8], bounds: &ParamBounds) -> Result<(AnchorFunction, ApproxStats)> {
    bounds.validate()?;
    let n = s1.len();
    let n2 = s2.len();
    let block = bounds.block_len(n);
    let half = bounds.scan_halfwidth(n) as i64;
    let step = ln_n(n);
    let min_window = block.div_ceil(2);

    let mut stats = ApproxStats::default();
    let mut anchors: Vec<usize> = vec![0];
    let mut row_buf = Vec::new();
    for m in 1..(n / block) {
        stats.blocks += 1;
        let source = &s1[m * block..(m + 1) * block];
        let prev = anchors[m - 1];
        let mut best: Option<(usize, usize)> = None; // (distance, start)
        for j in -half..=half {
            let start = prev as i64 + block as i64 + (j as f64 * step).round() as i64;
            let start = if n2 >= block {
                // keep the full window length; starts past the end pile up at n2 - L
                start.clamp(0, (n2 - block) as i64) as usize
            } else if start < 0 || start as usize >= n2 {
                continue;
            } else {
                start as usize
            };
            let end = (start + block).min(n2);
            if end - start < min_window {
                continue;
            }
            let d = edit_distance_cost_into(&mut row_buf, source, &s2[start..end]);
            stats.windows_scored += 1;
            stats.cells += source.len() * (end - start);
            if best.is_none_or(|(bd, _)| d <= bd) {
                best = Some((d, start));
            }
        }
        let anchor = match best {
            Some((_, start)) => start,
            None => {
                stats.carried_forward += 1;
                (prev + block).min(n2.saturating_sub(1))
            }
        };
        anchors.push(anchor);
    }
    let samples = anchors
        .iter()
        .enumerate()
        .map(|(m, &c)| (m * block + 1, c + 1))
        .collect();
    Ok((AnchorFunction { block_len: block, samples }, stats))
}

/// Failure base of the random-window bound at finite `k ln n`:
/// `(4e/r + 5e + 4e/(r k ln n))^r / 2`. Window separation needs this below 1.
pub fn separation_base(r: f64, k_ln_n: f64) -> f64 {
    let e = std::f64::consts::E;
    (4.0 * e / r + 5.0 * e + 4.0 * e / (r * k_ln_n)).powf(r) / 2.0
}

/// The largest `r` with `(4e/r + 5e)^r < 2`, i.e. the limit of admissible
/// window-score ratios as `k ln n` grows.
pub fn separation_ratio_limit() -> f64 {
    let f = |r: f64| separation_base(r, f64::INFINITY) - 1.0;
    let (mut lo, mut hi) = (1e-6, 0.5);
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstring::BitString;

    #[test]
    fn identity_channel_anchors_on_diagonal() {
        let s = BitString::random(4096, 11).to_symbols();
        let bounds = ParamBounds::default();
        let (f, stats) = approx_align_stats(&s, &s, &bounds).unwrap();
        let l = bounds.block_len(4096);
        assert_eq!(f.block_len, l);
        assert_eq!(f.len(), 4096 / l);
        for &(row, col) in &f.samples {
            assert_eq!(row, col);
        }
        assert_eq!(stats.carried_forward, 0);
        assert_eq!(stats.cells, predicted_cells(4096, &bounds));
    }

    #[test]
    fn short_source_has_single_sample() {
        let bounds = ParamBounds::default();
        let n = 250;
        assert!(n < 2 * bounds.block_len(n));
        let s = BitString::random(n, 1).to_symbols();
        let f = approx_align(&s, &s, &bounds).unwrap();
        assert_eq!(f.samples, vec![(1, 1)]);
    }

    #[test]
    fn tiny_target_carries_anchor_forward() {
        let bounds = ParamBounds::default().with_k(2.0);
        let s1 = BitString::random(200, 1).to_symbols();
        let s2 = BitString::random(3, 2).to_symbols();
        let (f, stats) = approx_align_stats(&s1, &s2, &bounds).unwrap();
        assert!(stats.carried_forward > 0);
        assert!(f.samples.iter().all(|&(_, c)| c >= 1 && c <= s2.len().max(1)));
    }

    #[test]
    fn sample_rows_validated() {
        assert!(AnchorFunction::from_samples(4, vec![(1, 1), (5, 7)]).is_ok());
        assert!(AnchorFunction::from_samples(4, vec![(1, 1), (6, 7)]).is_err());
        assert!(AnchorFunction::from_samples(0, vec![]).is_err());
    }

    #[test]
    fn json_shape() {
        let f = AnchorFunction::from_samples(3, vec![(1, 1), (4, 5)]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&f).unwrap();
        assert_eq!(v, serde_json::json!({"block_len": 3, "samples": [[1, 1], [4, 5]]}));
    }

    #[test]
    fn ratio_limit_value() {
        let r = separation_ratio_limit();
        assert!((r - 0.1569).abs() < 5e-4, "r = {r}");
        assert!(separation_base(0.15, 24.0 * (8192f64).ln()) < 1.0);
    }
}
