//! Exact edit distance over the dependency graph: the full quadratic DP and
//! the DP restricted to a band of per-row column intervals.
//!
//! Both engines break ties between predecessors in the fixed order
//! diagonal, vertical, horizontal, so the returned optimal path is
//! deterministic. Cells outside a band are treated as unreachable.

use serde::Serialize;

use crate::alignment::{Alignment, Vertex};
use crate::approx::AnchorFunction;
use crate::error::{Error, Result};

const INF: u32 = u32::MAX / 2;

const TAG_DIAG: u8 = 0;
const TAG_VERT: u8 = 1;
const TAG_HORZ: u8 = 2;
const TAG_ORIGIN: u8 = 3;

/// Two-bit predecessor tags, four per byte.
struct TagStore {
    bytes: Vec<u8>,
}

impl TagStore {
    fn new(cells: usize) -> Self {
        TagStore {
            bytes: vec![0; cells.div_ceil(4)],
        }
    }

    #[inline]
    fn set(&mut self, idx: usize, tag: u8) {
        let shift = (idx % 4) * 2;
        let b = &mut self.bytes[idx / 4];
        *b = (*b & !(3 << shift)) | (tag << shift);
    }

    #[inline]
    fn get(&self, idx: usize) -> u8 {
        (self.bytes[idx / 4] >> ((idx % 4) * 2)) & 3
    }
}

/// Result of a DP run.
#[derive(Debug, Clone)]
pub struct DpResult {
    pub cost: usize,
    pub alignment: Alignment,
    /// Number of DP cells evaluated.
    pub cells: usize,
}

/// Per-row column intervals `[lo_i, hi_i]`, rows `0..=n1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Band {
    n1: usize,
    n2: usize,
    rows: Vec<(usize, usize)>,
}

/// Summary figures for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BandStats {
    pub area: usize,
    pub max_width: usize,
}

impl Band {
    /// Any list of non-empty intervals inside `[0, n2]`. Reachability is
    /// checked by the DP, not here.
    pub fn new(n1: usize, n2: usize, rows: Vec<(usize, usize)>) -> Result<Self> {
        if rows.len() != n1 + 1 {
            return Err(Error::InvalidArgument(format!(
                "band has {} rows, expected {}",
                rows.len(),
                n1 + 1
            )));
        }
        if let Some((i, &(lo, hi))) = rows.iter().enumerate().find(|(_, &(lo, hi))| lo > hi || hi > n2) {
            return Err(Error::InvalidArgument(format!(
                "row {i} interval [{lo}, {hi}] is empty or exceeds n2 = {n2}"
            )));
        }
        Ok(Band { n1, n2, rows })
    }

    pub fn full(n1: usize, n2: usize) -> Self {
        Band {
            n1,
            n2,
            rows: vec![(0, n2); n1 + 1],
        }
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn rows(&self) -> &[(usize, usize)] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> (usize, usize) {
        self.rows[i]
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.rows
            .get(v.0)
            .is_some_and(|&(lo, hi)| (lo..=hi).contains(&v.1))
    }

    pub fn contains_path(&self, a: &Alignment) -> bool {
        a.vertices().iter().all(|&v| self.contains(v))
    }

    pub fn is_subset_of(&self, other: &Band) -> bool {
        self.n1 == other.n1
            && self.n2 == other.n2
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| b.0 <= a.0 && a.1 <= b.1)
    }

    pub fn area(&self) -> usize {
        self.rows.iter().map(|&(lo, hi)| hi - lo + 1).sum()
    }

    pub fn stats(&self) -> BandStats {
        BandStats {
            area: self.area(),
            max_width: self.rows.iter().map(|&(lo, hi)| hi - lo + 1).max().unwrap_or(0),
        }
    }

    /// Endpoints inside, monotone bounds and row-to-row connectivity.
    /// Bands satisfying this always contain a path from corner to corner.
    pub fn is_well_formed(&self) -> bool {
        let r = &self.rows;
        r[0].0 == 0
            && r[self.n1].1 == self.n2
            && r.windows(2).all(|w| {
                let ((lo0, hi0), (lo1, hi1)) = (w[0], w[1]);
                lo0 <= lo1 && hi0 <= hi1 && hi1 >= lo0 && lo1 <= hi0 + 1
            })
    }
}

/// Cost-only edit distance with a single rolling row.
pub fn edit_distance_cost(s1: &[u8], s2: &[u8]) -> usize {
    edit_distance_cost_into(&mut Vec::new(), s1, s2)
}

/// [`edit_distance_cost`] reusing `row` as scratch space.
pub fn edit_distance_cost_into(row: &mut Vec<u32>, s1: &[u8], s2: &[u8]) -> usize {
    let m = s2.len();
    row.clear();
    row.extend(0..=m as u32);
    for (i, &a) in s1.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i as u32 + 1;
        for j in 1..=m {
            let up = row[j];
            let v = (diag + u32::from(a != s2[j - 1])).min(up + 1).min(row[j - 1] + 1);
            diag = up;
            row[j] = v;
        }
    }
    row[m] as usize
}

/// Full quadratic DP with traceback.
pub fn edit_distance_full(s1: &[u8], s2: &[u8]) -> DpResult {
    let (n1, n2) = (s1.len(), s2.len());
    let width = n2 + 1;
    let mut tags = TagStore::new((n1 + 1) * width);
    let mut prev: Vec<u32> = (0..=n2 as u32).collect();
    let mut cur = vec![0u32; width];
    tags.set(0, TAG_ORIGIN);
    for j in 1..=n2 {
        tags.set(j, TAG_HORZ);
    }
    for i in 1..=n1 {
        let a = s1[i - 1];
        cur[0] = i as u32;
        tags.set(i * width, TAG_VERT);
        for j in 1..=n2 {
            let mut best = prev[j - 1] + u32::from(a != s2[j - 1]);
            let mut tag = TAG_DIAG;
            if prev[j] + 1 < best {
                best = prev[j] + 1;
                tag = TAG_VERT;
            }
            if cur[j - 1] + 1 < best {
                best = cur[j - 1] + 1;
                tag = TAG_HORZ;
            }
            cur[j] = best;
            tags.set(i * width + j, tag);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let alignment = trace_back(n1, n2, |i, j| tags.get(i * width + j));
    DpResult {
        cost: prev[n2] as usize,
        alignment,
        cells: (n1 + 1) * width,
    }
}

fn trace_back(n1: usize, n2: usize, tag_at: impl Fn(usize, usize) -> u8) -> Alignment {
    let mut path = Vec::with_capacity(n1 + n2 + 1);
    let (mut i, mut j) = (n1, n2);
    path.push((i, j));
    loop {
        match tag_at(i, j) {
            TAG_ORIGIN => break,
            TAG_DIAG => {
                i -= 1;
                j -= 1;
            }
            TAG_VERT => i -= 1,
            _ => j -= 1,
        }
        path.push((i, j));
    }
    debug_assert_eq!((i, j), (0, 0));
    path.reverse();
    Alignment::from_vertices_unchecked(path)
}

/// DP restricted to the cells of `band`.
pub fn edit_distance_banded(s1: &[u8], s2: &[u8], band: &Band) -> Result<DpResult> {
    let (n1, n2) = (s1.len(), s2.len());
    if (band.n1, band.n2) != (n1, n2) {
        return Err(Error::DimensionMismatch {
            expected: (n1, n2),
            actual: (band.n1, band.n2),
        });
    }
    let disconnected = || Error::DisconnectedBand { n1, n2 };

    let mut offsets = Vec::with_capacity(n1 + 2);
    let mut total = 0usize;
    for &(lo, hi) in &band.rows {
        offsets.push(total);
        total += hi - lo + 1;
    }
    let mut tags = TagStore::new(total);
    let max_width = band.rows.iter().map(|&(lo, hi)| hi - lo + 1).max().unwrap_or(1);
    let mut prev = vec![INF; max_width];
    let mut cur = vec![INF; max_width];

    // row 0: only horizontal moves from the origin
    let (lo0, hi0) = band.rows[0];
    for j in lo0..=hi0 {
        let k = j - lo0;
        if j == 0 {
            cur[k] = 0;
            tags.set(offsets[0] + k, TAG_ORIGIN);
        } else if k > 0 && cur[k - 1] < INF {
            cur[k] = cur[k - 1] + 1;
            tags.set(offsets[0] + k, TAG_HORZ);
        } else {
            cur[k] = INF;
        }
    }
    let (mut plo, mut phi) = (lo0, hi0);
    for i in 1..=n1 {
        std::mem::swap(&mut prev, &mut cur);
        let (lo, hi) = band.rows[i];
        let a = s1[i - 1];
        let base = offsets[i];
        for j in lo..=hi {
            let k = j - lo;
            let mut best = INF;
            let mut tag = TAG_ORIGIN;
            if j >= 1 && j > plo && j - 1 <= phi {
                let d = prev[j - 1 - plo];
                if d < INF {
                    best = d + u32::from(a != s2[j - 1]);
                    tag = TAG_DIAG;
                }
            }
            if j >= plo && j <= phi {
                let up = prev[j - plo];
                if up < INF && up + 1 < best {
                    best = up + 1;
                    tag = TAG_VERT;
                }
            }
            if k > 0 {
                let left = cur[k - 1];
                if left < INF && left + 1 < best {
                    best = left + 1;
                    tag = TAG_HORZ;
                }
            }
            cur[k] = best;
            tags.set(base + k, tag);
        }
        plo = lo;
        phi = hi;
    }
    let (lo_last, hi_last) = band.rows[n1];
    if !(lo_last..=hi_last).contains(&n2) || cur[n2 - lo_last] >= INF {
        return Err(disconnected());
    }
    let cost = cur[n2 - lo_last] as usize;
    let alignment = trace_back(n1, n2, |i, j| tags.get(offsets[i] + (j - band.rows[i].0)));
    Ok(DpResult {
        cost,
        alignment,
        cells: total,
    })
}

/// Rows `[max(0, i - r), min(n2, i + r)]`.
pub fn diagonal_band(n1: usize, n2: usize, radius: usize) -> Result<Band> {
    let needed = n1.abs_diff(n2);
    if radius < needed {
        return Err(Error::BandTooNarrow { radius, needed });
    }
    let rows = (0..=n1)
        .map(|i| (i.saturating_sub(radius), (i + radius).min(n2)))
        .collect();
    Ok(Band { n1, n2, rows })
}

/// Band of the given radius around the piecewise-linear curve through the
/// anchor samples, continued to `(n1, n2)` past the last sample.
///
/// Centers are made nondecreasing and clamped to `[0, n2]`; the first row is
/// widened to column 0, the last to column `n2`, and any row whose interval
/// ends more than one column before the next row's start is extended so the
/// result is [well formed](Band::is_well_formed).
pub fn band_from_anchor_function(f: &AnchorFunction, n1: usize, n2: usize, radius: usize) -> Result<Band> {
    let points = f.lattice_points();
    if points.is_empty() {
        return Err(Error::InvalidArgument("anchor function has no samples".into()));
    }
    Ok(band_around_points(&points, n1, n2, radius.max(1)))
}

pub(crate) fn band_around_points(points: &[Vertex], n1: usize, n2: usize, radius: usize) -> Band {
    let mut knots: Vec<(usize, f64)> = Vec::with_capacity(points.len() + 2);
    if points[0].0 > 0 {
        knots.push((0, 0.0));
    }
    for &(r, c) in points {
        if r > n1 {
            break;
        }
        if knots.last().is_some_and(|&(lr, _)| lr >= r) {
            continue;
        }
        knots.push((r, c.min(n2) as f64));
    }
    if knots.last().is_some_and(|&(lr, _)| lr < n1) {
        knots.push((n1, n2 as f64));
    }

    let mut centers = vec![0usize; n1 + 1];
    if knots.len() == 1 {
        centers[0] = knots[0].1 as usize;
    }
    for w in knots.windows(2) {
        let ((ra, ca), (rb, cb)) = (w[0], w[1]);
        let span = (rb - ra) as f64;
        for (i, c) in centers.iter_mut().enumerate().take(rb + 1).skip(ra) {
            let t = (i - ra) as f64 / span;
            *c = (ca + (cb - ca) * t).round().clamp(0.0, n2 as f64) as usize;
        }
    }
    let mut running = 0;
    for c in centers.iter_mut() {
        running = running.max(*c);
        *c = running;
    }

    let mut rows: Vec<(usize, usize)> = centers
        .iter()
        .map(|&c| (c.saturating_sub(radius), (c + radius).min(n2)))
        .collect();
    rows[0].0 = 0;
    rows[n1].1 = n2;
    for i in 0..n1 {
        let next_lo = rows[i + 1].0;
        if next_lo > rows[i].1 + 1 {
            rows[i].1 = next_lo - 1;
        }
    }
    Band { n1, n2, rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|c| c - b'0').collect()
    }

    #[test]
    fn small_examples() {
        assert_eq!(edit_distance_full(&bits("0101"), &bits("0101")).cost, 0);
        assert_eq!(edit_distance_full(&bits(""), &bits("101")).cost, 3);
        assert_eq!(edit_distance_full(&bits("0010"), &bits("1000")).cost, 2);
        assert_eq!(edit_distance_cost(&bits("0010"), &bits("1000")), 2);
        assert_eq!(edit_distance_cost(&bits("111"), &bits("")), 3);
    }

    #[test]
    fn traceback_prefers_diagonal() {
        let r = edit_distance_full(&bits("01"), &bits("10"));
        assert_eq!(r.cost, 2);
        // diagonal mismatch twice ties with delete+insert; diagonal wins
        assert_eq!(r.alignment, Alignment::diagonal(2));
    }

    #[test]
    fn full_band_matches_full_dp() {
        let a = bits("0110100111010");
        let b = bits("110100101101110");
        let full = edit_distance_full(&a, &b);
        let banded = edit_distance_banded(&a, &b, &Band::full(a.len(), b.len())).unwrap();
        assert_eq!(full.cost, banded.cost);
        assert_eq!(full.alignment, banded.alignment);
        assert_eq!(banded.cells, (a.len() + 1) * (b.len() + 1));
    }

    #[test]
    fn exact_diagonal_band_on_identical_strings() {
        let a = bits("1101001");
        let band = diagonal_band(7, 7, 0).unwrap();
        assert_eq!(band.area(), 8);
        let r = edit_distance_banded(&a, &a, &band).unwrap();
        assert_eq!(r.cost, 0);
        assert_eq!(r.alignment, Alignment::diagonal(7));
    }

    #[test]
    fn diagonal_band_shapes() {
        let b = diagonal_band(4, 4, 1).unwrap();
        assert_eq!(b.rows(), &[(0, 1), (0, 2), (1, 3), (2, 4), (3, 4)]);
        assert!(b.is_well_formed());
        assert_eq!(diagonal_band(5, 3, 5).unwrap(), Band::full(5, 3));
        assert!(matches!(diagonal_band(6, 2, 3), Err(Error::BandTooNarrow { needed: 4, .. })));
    }

    #[test]
    fn disconnected_band_is_reported() {
        let a = bits("0101");
        // row 2 cannot be entered from row 1
        let band = Band::new(4, 4, vec![(0, 0), (0, 1), (3, 3), (3, 4), (4, 4)]).unwrap();
        assert!(matches!(
            edit_distance_banded(&a, &a, &band),
            Err(Error::DisconnectedBand { .. })
        ));
        let no_corner = Band::new(4, 4, vec![(0, 1), (0, 2), (1, 3), (2, 3), (3, 3)]).unwrap();
        assert!(edit_distance_banded(&a, &a, &no_corner).is_err());
        assert!(edit_distance_banded(&a, &bits("01"), &Band::full(4, 4)).is_err());
    }

    #[test]
    fn band_validation() {
        assert!(Band::new(1, 3, vec![(0, 1)]).is_err());
        assert!(Band::new(1, 3, vec![(0, 1), (2, 1)]).is_err());
        assert!(Band::new(1, 3, vec![(0, 1), (2, 4)]).is_err());
    }

    #[test]
    fn anchor_band_identity_is_diagonal_band() {
        let f = AnchorFunction::from_samples(10, vec![(1, 1), (11, 11), (21, 21), (31, 31)]).unwrap();
        let band = band_from_anchor_function(&f, 50, 50, 4).unwrap();
        assert_eq!(band, diagonal_band(50, 50, 4).unwrap());
        let single = AnchorFunction::from_samples(10, vec![(1, 1)]).unwrap();
        assert_eq!(
            band_from_anchor_function(&single, 30, 30, 3).unwrap(),
            diagonal_band(30, 30, 3).unwrap()
        );
    }

    #[test]
    fn anchor_band_repairs_wild_anchors() {
        // anchors that go backwards and jump far: the band must still be
        // well formed and reach both corners
        let f = AnchorFunction::from_samples(5, vec![(1, 1), (6, 40), (11, 2), (16, 60)]).unwrap();
        let band = band_from_anchor_function(&f, 20, 80, 2).unwrap();
        assert!(band.is_well_formed());
        let s1 = vec![0u8; 20];
        let s2 = vec![1u8; 80];
        let r = edit_distance_banded(&s1, &s2, &band).unwrap();
        assert!(r.cost >= edit_distance_cost(&s1, &s2));
    }
}
