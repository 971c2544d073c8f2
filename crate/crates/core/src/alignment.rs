//! Alignments as lattice paths through the dependency graph.
//!
//! Vertex `(i, j)` means "the first `i` symbols of `s1` are aligned with the
//! first `j` symbols of `s2`". A diagonal edge `(i-1, j-1) -> (i, j)` costs 0
//! when `s1[i-1] == s2[j-1]` and 1 otherwise; vertical `(i-1, j) -> (i, j)`
//! and horizontal `(i, j-1) -> (i, j)` edges cost 1.
//!
//! Besides cost and the alignment function, this module carries the break
//! machinery used to compare an arbitrary alignment with the canonical one:
//! break extraction and short/long break replacement.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice point `(row, column)`.
pub type Vertex = (usize, usize);

/// Largest dimension accepted by [`enumerate_alignments`].
pub const ENUMERATION_LIMIT: usize = 10;

/// Kind of a single lattice step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Diagonal,
    /// Consumes a symbol of `s1` only.
    Vertical,
    /// Consumes a symbol of `s2` only.
    Horizontal,
}

impl Step {
    /// The step from `a` to `b`, if they are adjacent in the lattice.
    pub fn between(a: Vertex, b: Vertex) -> Option<Step> {
        match (b.0.checked_sub(a.0), b.1.checked_sub(a.1)) {
            (Some(1), Some(1)) => Some(Step::Diagonal),
            (Some(1), Some(0)) => Some(Step::Vertical),
            (Some(0), Some(1)) => Some(Step::Horizontal),
            _ => None,
        }
    }

    pub fn apply(self, v: Vertex) -> Vertex {
        match self {
            Step::Diagonal => (v.0 + 1, v.1 + 1),
            Step::Vertical => (v.0 + 1, v.1),
            Step::Horizontal => (v.0, v.1 + 1),
        }
    }
}

/// A monotone path from `(0, 0)` to `(n1, n2)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<[usize; 2]>", into = "Vec<[usize; 2]>")]
pub struct Alignment {
    vertices: Vec<Vertex>,
    n1: usize,
    n2: usize,
}

impl Alignment {
    /// Validates start, end and step shape.
    pub fn new(vertices: Vec<Vertex>) -> Result<Self> {
        let (&first, &last) = match (vertices.first(), vertices.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::InvalidAlignment("empty vertex list".into())),
        };
        if first != (0, 0) {
            return Err(Error::InvalidAlignment(format!("path starts at {first:?}, not (0, 0)")));
        }
        for (k, w) in vertices.windows(2).enumerate() {
            if Step::between(w[0], w[1]).is_none() {
                return Err(Error::InvalidAlignment(format!(
                    "illegal step {:?} -> {:?} at position {k}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Alignment {
            vertices,
            n1: last.0,
            n2: last.1,
        })
    }

    /// Like [`Alignment::new`] but also checks the endpoint.
    pub fn for_dims(vertices: Vec<Vertex>, n1: usize, n2: usize) -> Result<Self> {
        let a = Alignment::new(vertices)?;
        a.check_dims(n1, n2)?;
        Ok(a)
    }

    pub(crate) fn from_vertices_unchecked(vertices: Vec<Vertex>) -> Self {
        let last = *vertices.last().expect("non-empty path");
        debug_assert!(Alignment::new(vertices.clone()).is_ok());
        Alignment {
            vertices,
            n1: last.0,
            n2: last.1,
        }
    }

    /// Build from a start at `(0, 0)` and a step sequence.
    pub fn from_steps(steps: impl IntoIterator<Item = Step>) -> Self {
        let mut v = vec![(0, 0)];
        for s in steps {
            let next = s.apply(*v.last().unwrap());
            v.push(next);
        }
        Alignment::from_vertices_unchecked(v)
    }

    /// The diagonal `(0,0), (1,1), ..., (n,n)`.
    pub fn diagonal(n: usize) -> Self {
        Alignment::from_steps(std::iter::repeat_n(Step::Diagonal, n))
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn steps(&self) -> impl Iterator<Item = Step> + '_ {
        self.vertices
            .windows(2)
            .map(|w| Step::between(w[0], w[1]).expect("validated path"))
    }

    fn check_dims(&self, n1: usize, n2: usize) -> Result<()> {
        if (self.n1, self.n2) != (n1, n2) {
            return Err(Error::DimensionMismatch {
                expected: (n1, n2),
                actual: (self.n1, self.n2),
            });
        }
        Ok(())
    }

    /// Sum of edge weights over the path.
    pub fn cost(&self, s1: &[u8], s2: &[u8]) -> Result<usize> {
        self.check_dims(s1.len(), s2.len())?;
        Ok(self
            .vertices
            .windows(2)
            .map(|w| match Step::between(w[0], w[1]) {
                Some(Step::Diagonal) => usize::from(s1[w[1].0 - 1] != s2[w[1].1 - 1]),
                _ => 1,
            })
            .sum())
    }

    /// Column of the first vertex in row `i`.
    pub fn alignment_function(&self, i: usize) -> usize {
        assert!(i <= self.n1, "row {i} outside 0..={}", self.n1);
        let pos = self.vertices.partition_point(|v| v.0 < i);
        self.vertices[pos].1
    }

    /// `alignment_function` for every row `0..=n1`.
    pub fn alignment_function_table(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n1 + 1);
        for &(i, j) in &self.vertices {
            if i == out.len() {
                out.push(j);
            }
        }
        out
    }
}

impl fmt::Debug for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Alignment{:?}", self.vertices)
    }
}

impl TryFrom<Vec<[usize; 2]>> for Alignment {
    type Error = Error;

    fn try_from(v: Vec<[usize; 2]>) -> Result<Self> {
        Alignment::new(v.into_iter().map(|[i, j]| (i, j)).collect())
    }
}

impl From<Alignment> for Vec<[usize; 2]> {
    fn from(a: Alignment) -> Self {
        a.vertices.into_iter().map(|(i, j)| [i, j]).collect()
    }
}

/// O(1) membership and position lookups on a monotone path.
///
/// A monotone path meets each row in a contiguous run of columns, so a
/// per-row `(first column, last column, position of first vertex)` triple
/// answers "is `(i, j)` on the path, and where".
pub struct PathIndex<'a> {
    path: &'a Alignment,
    rows: Vec<(usize, usize, usize)>,
}

impl<'a> PathIndex<'a> {
    pub fn new(path: &'a Alignment) -> Self {
        let mut rows: Vec<(usize, usize, usize)> = Vec::with_capacity(path.n1 + 1);
        for (pos, &(i, j)) in path.vertices.iter().enumerate() {
            if i == rows.len() {
                rows.push((j, j, pos));
            } else {
                rows[i].1 = j;
            }
        }
        PathIndex { path, rows }
    }

    /// Position of `v` in the path, if the path visits it.
    pub fn position(&self, v: Vertex) -> Option<usize> {
        let &(lo, hi, start) = self.rows.get(v.0)?;
        (lo..=hi).contains(&v.1).then(|| start + (v.1 - lo))
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.position(v).is_some()
    }

    /// Vertices strictly after `from` up to and including `to`.
    fn subpath_after(&self, from: Vertex, to: Vertex) -> &'a [Vertex] {
        let a = self.position(from).expect("break start lies on the path");
        let b = self.position(to).expect("break end lies on the path");
        &self.path.vertices[a + 1..=b]
    }
}

/// A maximal excursion of an alignment away from the canonical alignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Break {
    pub start_vertex: Vertex,
    pub end_vertex: Vertex,
    /// Vertices strictly between the endpoints, none on the canonical path.
    pub interior: Vec<Vertex>,
    /// Row span `end.0 - start.0`.
    pub length: usize,
    /// Index of `start_vertex` within the alignment it was taken from.
    pub start_index: usize,
}

impl Break {
    fn end_index(&self) -> usize {
        self.start_index + self.interior.len() + 1
    }

    /// Whether two breaks follow the same route (positions ignored).
    pub fn same_route(&self, other: &Break) -> bool {
        self.start_vertex == other.start_vertex
            && self.end_vertex == other.end_vertex
            && self.interior == other.interior
    }
}

/// Breaks of `a` from `a_star`, in path order, each tagged `true` when long
/// (row span at least `block_len`).
///
/// Both alignments must have the same dimensions.
pub fn extract_breaks(a: &Alignment, a_star: &Alignment, block_len: usize) -> Vec<(Break, bool)> {
    assert_eq!(
        (a.n1, a.n2),
        (a_star.n1, a_star.n2),
        "alignments must share dimensions"
    );
    let index = PathIndex::new(a_star);
    let mut out = Vec::new();
    let mut prev: Option<(usize, usize)> = None; // (position in a, position in a_star)
    for (p, &v) in a.vertices.iter().enumerate() {
        let Some(q) = index.position(v) else { continue };
        if let Some((pp, pq)) = prev {
            // a single edge shared with a_star is not a break
            let shared_edge = p == pp + 1 && q == pq + 1;
            if !shared_edge {
                let start = a.vertices[pp];
                let brk = Break {
                    start_vertex: start,
                    end_vertex: v,
                    interior: a.vertices[pp + 1..p].to_vec(),
                    length: v.0 - start.0,
                    start_index: pp,
                };
                let long = brk.length >= block_len;
                out.push((brk, long));
            }
        }
        prev = Some((p, q));
    }
    out
}

fn replace_breaks(a: &Alignment, a_star: &Alignment, block_len: usize, replace_long: bool) -> Alignment {
    let index = PathIndex::new(a_star);
    let mut out = Vec::with_capacity(a.vertices.len());
    let mut cursor = 0;
    for (brk, long) in extract_breaks(a, a_star, block_len) {
        if long != replace_long {
            continue;
        }
        out.extend_from_slice(&a.vertices[cursor..=brk.start_index]);
        out.extend_from_slice(index.subpath_after(brk.start_vertex, brk.end_vertex));
        cursor = brk.end_index() + 1;
    }
    out.extend_from_slice(&a.vertices[cursor..]);
    Alignment::from_vertices_unchecked(out)
}

/// Short break replacement: every short break is swapped for the canonical
/// subpath between its endpoints.
pub fn sbr(a: &Alignment, a_star: &Alignment, block_len: usize) -> Alignment {
    replace_breaks(a, a_star, block_len, false)
}

/// Long break replacement: every long break is swapped for the canonical
/// subpath between its endpoints.
pub fn lbr(a: &Alignment, a_star: &Alignment, block_len: usize) -> Alignment {
    replace_breaks(a, a_star, block_len, true)
}

/// True when the alignment has no long break.
pub fn is_good(a: &Alignment, a_star: &Alignment, block_len: usize) -> bool {
    extract_breaks(a, a_star, block_len).iter().all(|(_, long)| !long)
}

/// Every monotone path from `(0,0)` to `(n1,n2)`, lazily, each exactly once.
pub fn enumerate_alignments(n1: usize, n2: usize) -> Result<AlignmentIter> {
    if n1 > ENUMERATION_LIMIT || n2 > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            n1,
            n2,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(AlignmentIter {
        n1,
        n2,
        path: vec![(0, 0)],
        moves: Vec::new(),
        started: false,
    })
}

const MOVES: [Step; 3] = [Step::Diagonal, Step::Vertical, Step::Horizontal];

/// Depth-first enumeration of lattice paths. `moves[k]` is the index into
/// [`MOVES`] taken from `path[k]`.
pub struct AlignmentIter {
    n1: usize,
    n2: usize,
    path: Vec<Vertex>,
    moves: Vec<usize>,
    started: bool,
}

impl AlignmentIter {
    fn fits(&self, v: Vertex) -> bool {
        v.0 <= self.n1 && v.1 <= self.n2
    }

    fn first_move_from(&self, v: Vertex, start: usize) -> Option<usize> {
        (start..MOVES.len()).find(|&m| self.fits(MOVES[m].apply(v)))
    }

    /// Extend greedily with the lowest legal move until the corner.
    fn descend(&mut self) {
        loop {
            let v = *self.path.last().unwrap();
            if v == (self.n1, self.n2) {
                return;
            }
            let m = self.first_move_from(v, 0).expect("inside the rectangle a move exists");
            self.moves.push(m);
            self.path.push(MOVES[m].apply(v));
        }
    }
}

impl Iterator for AlignmentIter {
    type Item = Alignment;

    fn next(&mut self) -> Option<Alignment> {
        if !self.started {
            self.started = true;
            self.descend();
            return Some(Alignment::from_vertices_unchecked(self.path.clone()));
        }
        loop {
            let last = self.moves.pop()?;
            self.path.pop();
            let v = *self.path.last().unwrap();
            if let Some(m) = self.first_move_from(v, last + 1) {
                self.moves.push(m);
                self.path.push(MOVES[m].apply(v));
                self.descend();
                return Some(Alignment::from_vertices_unchecked(self.path.clone()));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Step::*;

    fn path(v: &[(usize, usize)]) -> Alignment {
        Alignment::new(v.to_vec()).unwrap()
    }

    #[test]
    fn validation() {
        assert!(Alignment::new(vec![]).is_err());
        assert!(Alignment::new(vec![(1, 0)]).is_err());
        assert!(Alignment::new(vec![(0, 0), (2, 1)]).is_err());
        assert!(Alignment::new(vec![(0, 0), (0, 0)]).is_err());
        assert!(Alignment::for_dims(vec![(0, 0), (1, 1)], 1, 2).is_err());
        assert_eq!(Alignment::new(vec![(0, 0)]).unwrap().n1(), 0);
    }

    #[test]
    fn cost_examples() {
        let s = [0u8, 1, 0, 1];
        assert_eq!(Alignment::diagonal(4).cost(&s, &s).unwrap(), 0);
        let s1 = [0u8, 1, 1];
        let s2 = [1u8, 0];
        let around = Alignment::from_steps([Vertical, Vertical, Vertical, Horizontal, Horizontal]);
        assert_eq!(around.cost(&s1, &s2).unwrap(), 5);
        assert!(Alignment::diagonal(3).cost(&s1, &s2).is_err());
    }

    #[test]
    fn alignment_function_reads_first_vertex() {
        let a = path(&[(0, 0), (1, 0), (2, 1)]);
        assert_eq!(a.alignment_function(0), 0);
        assert_eq!(a.alignment_function(1), 0);
        assert_eq!(a.alignment_function(2), 1);
        let d = Alignment::diagonal(5);
        assert!((0..=5).all(|i| d.alignment_function(i) == i));
        let h = path(&[(0, 0), (0, 1), (0, 2), (1, 3), (1, 4)]);
        assert_eq!(h.alignment_function_table(), vec![0, 3]);
    }

    #[test]
    fn no_breaks_against_itself() {
        let a = Alignment::from_steps([Diagonal, Horizontal, Vertical, Diagonal]);
        assert!(extract_breaks(&a, &a, 3).is_empty());
        assert_eq!(sbr(&a, &a, 3), a);
        assert_eq!(lbr(&a, &a, 3), a);
    }

    #[test]
    fn single_short_break_between_rows_3_and_5() {
        let star = Alignment::diagonal(8);
        let a = path(&[
            (0, 0),
            (1, 1),
            (2, 2),
            (3, 3),
            (4, 3),
            (5, 4),
            (5, 5),
            (6, 6),
            (7, 7),
            (8, 8),
        ]);
        let breaks = extract_breaks(&a, &star, 10);
        assert_eq!(breaks.len(), 1);
        let (b, long) = &breaks[0];
        assert!(!long);
        assert_eq!(b.length, 2);
        assert_eq!(b.start_vertex, (3, 3));
        assert_eq!(b.end_vertex, (5, 5));
        assert_eq!(b.interior, vec![(4, 3), (5, 4)]);
        assert_eq!(sbr(&a, &star, 10), star);
        assert_eq!(lbr(&a, &star, 10), a);
        assert_eq!(lbr(&a, &star, 2), star);
    }

    #[test]
    fn diagonal_shortcut_over_canonical_corner_is_a_break() {
        // canonical goes around (1,0); the alignment cuts the corner with a
        // diagonal edge whose endpoints are both canonical vertices
        let star = path(&[(0, 0), (1, 0), (1, 1)]);
        let a = path(&[(0, 0), (1, 1)]);
        let breaks = extract_breaks(&a, &star, 5);
        assert_eq!(breaks.len(), 1);
        assert_eq!(breaks[0].0.length, 1);
        assert!(breaks[0].0.interior.is_empty());
        assert_eq!(sbr(&a, &star, 5), star);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_alignments(1, 1).unwrap().count(), 3);
        assert_eq!(enumerate_alignments(0, 4).unwrap().count(), 1);
        assert_eq!(enumerate_alignments(0, 0).unwrap().count(), 1);
        assert!(enumerate_alignments(11, 2).is_err());
    }

    #[test]
    fn serde_as_pair_list() {
        let a = path(&[(0, 0), (1, 0), (2, 1)]);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, "[[0,0],[1,0],[2,1]]");
        let back: Alignment = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<Alignment>("[[0,0],[2,2]]").is_err());
    }
}
