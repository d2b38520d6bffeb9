//! Bit-row adjacency graphs and the constructors used throughout the crate.
//!
//! A [`Graph`] stores one row of `u64` words per vertex. Graphs with at most
//! 64 vertices use a single word per row; larger graphs (up to
//! [`MAX_VERTICES`]) use several words per row with the same semantics.

use serde::Serialize;

use crate::error::GraphError;
use crate::pattern::PatternGraph;

/// Largest vertex count a [`Graph`] can hold.
pub const MAX_VERTICES: usize = 256;

/// Vertex count served by single-word rows.
pub const FAST_PATH_VERTICES: usize = 64;

/// An undirected simple graph on vertices `0..n`.
///
/// Invariants: adjacency is symmetric, there are no loops and no row uses a
/// bit at or above `n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edge_list())
            .finish()
    }
}

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl Graph {
    /// The edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        if n > MAX_VERTICES {
            return Err(GraphError::TooManyVertices {
                n,
                max: MAX_VERTICES,
            });
        }
        let words = words_for(n);
        Ok(Graph {
            n,
            words,
            bits: vec![0; n * words],
        })
    }

    /// Builds a graph from an edge list. Duplicate pairs are harmless.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::empty(n)?;
        for &(u, v) in edges {
            g.set_edge(u, v, true)?;
        }
        Ok(g)
    }

    /// Builds a graph on `n <= 64` vertices directly from its neighbourhood
    /// rows. The rows must describe a valid simple graph.
    pub fn from_rows(rows: &[u64]) -> Result<Self, GraphError> {
        let n = rows.len();
        if n > FAST_PATH_VERTICES {
            return Err(GraphError::TooManyVertices {
                n,
                max: FAST_PATH_VERTICES,
            });
        }
        let mut g = Graph::empty(n)?;
        g.bits.copy_from_slice(rows);
        g.validate()?;
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of `u64` words per adjacency row.
    #[inline]
    pub fn words(&self) -> usize {
        self.words
    }

    /// The neighbourhood bit row of `v`.
    #[inline]
    pub fn row(&self, v: usize) -> &[u64] {
        &self.bits[v * self.words..(v + 1) * self.words]
    }

    /// Single-word row for graphs on the fast path.
    #[inline]
    pub fn row64(&self, v: usize) -> u64 {
        debug_assert_eq!(self.words, 1);
        self.bits[v]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    /// Neighbours of `v` in increasing order.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        iter_bits(self.row(v))
    }

    /// Adds (`present = true`) or removes the edge `uv`.
    pub fn set_edge(&mut self, u: usize, v: usize, present: bool) -> Result<(), GraphError> {
        if u >= self.n || v >= self.n {
            return Err(GraphError::VertexOutOfRange {
                vertex: u.max(v),
                n: self.n,
            });
        }
        if u == v {
            return Err(GraphError::Loop(u));
        }
        self.set_edge_unchecked(u, v, present);
        debug_assert!(self.has_edge(u, v) == present && self.has_edge(v, u) == present);
        Ok(())
    }

    #[inline]
    pub(crate) fn set_edge_unchecked(&mut self, u: usize, v: usize, present: bool) {
        let w = self.words;
        if present {
            self.bits[u * w + v / 64] |= 1 << (v % 64);
            self.bits[v * w + u / 64] |= 1 << (u % 64);
        } else {
            self.bits[u * w + v / 64] &= !(1 << (v % 64));
            self.bits[v * w + u / 64] &= !(1 << (u % 64));
        }
    }

    /// Functional form of [`Graph::set_edge`].
    pub fn with_edge(mut self, u: usize, v: usize, present: bool) -> Result<Self, GraphError> {
        self.set_edge(u, v, present)?;
        Ok(self)
    }

    /// All edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in self.neighbors(u).filter(|&v| v > u) {
                out.push((u, v));
            }
        }
        out
    }

    /// Checks symmetry, loop-freeness and that rows stay below `n`.
    pub fn validate(&self) -> Result<(), GraphError> {
        for u in 0..self.n {
            if self.has_edge(u, u) {
                return Err(GraphError::Loop(u));
            }
            let row = self.row(u);
            for (i, &w) in row.iter().enumerate() {
                let lo = i * 64;
                let valid = if lo + 64 <= self.n {
                    u64::MAX
                } else if lo >= self.n {
                    0
                } else {
                    (1u64 << (self.n - lo)) - 1
                };
                if w & !valid != 0 {
                    return Err(GraphError::StrayBits(u));
                }
            }
            for v in self.neighbors(u) {
                if !self.has_edge(v, u) {
                    return Err(GraphError::Asymmetric(u, v));
                }
            }
        }
        Ok(())
    }

    /// The graph obtained by relabelling vertex `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, GraphError> {
        if perm.len() != self.n {
            return Err(GraphError::LengthMismatch {
                expected: self.n,
                got: perm.len(),
            });
        }
        let mut g = Graph::empty(self.n)?;
        for (u, v) in self.edge_list() {
            g.set_edge(perm[u], perm[v], true)?;
        }
        debug_assert!(g.validate().is_ok());
        Ok(g)
    }

    /// Induced subgraph on `keep`, relabelled `0..keep.len()` in the given order.
    pub fn induced(&self, keep: &[usize]) -> Result<Self, GraphError> {
        let mut g = Graph::empty(keep.len())?;
        for (i, &u) in keep.iter().enumerate() {
            for (j, &v) in keep.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    g.set_edge_unchecked(i, j, true);
                }
            }
        }
        Ok(g)
    }
}

/// Iterates the set bits of a multi-word row.
pub(crate) fn iter_bits(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(i, &w)| {
        let mut m = w;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let b = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(i * 64 + b)
            }
        })
    })
}

#[inline]
pub(crate) fn and_count(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x & y).count_ones() as usize)
        .sum()
}

/// A vertex subset stored as a bit row over the same universe as a graph.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct VertexSet {
    bits: Vec<u64>,
}

impl std::fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet {
            bits: vec![0; words_for(n)],
        }
    }

    pub fn from_row(row: &[u64]) -> Self {
        VertexSet { bits: row.to_vec() }
    }

    pub fn from_vertices(n: usize, vs: impl IntoIterator<Item = usize>) -> Self {
        let mut s = VertexSet::empty(n);
        for v in vs {
            s.insert(v);
        }
        s
    }

    pub fn insert(&mut self, v: usize) {
        self.bits[v / 64] |= 1 << (v % 64);
    }

    pub fn remove(&mut self, v: usize) {
        self.bits[v / 64] &= !(1 << (v % 64));
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.bits
            .get(v / 64)
            .is_some_and(|w| w >> (v % 64) & 1 == 1)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        iter_bits(&self.bits)
    }

    pub fn as_row(&self) -> &[u64] {
        &self.bits
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        self.zip_with(other, |a, b| a & !b)
    }

    /// `|self ∩ row|` for a graph row.
    #[inline]
    pub fn count_in(&self, row: &[u64]) -> usize {
        and_count(&self.bits, row)
    }

    fn zip_with(&self, other: &VertexSet, f: impl Fn(u64, u64) -> u64) -> VertexSet {
        VertexSet {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl Serialize for VertexSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

// ============================================================================
// Constructors
// ============================================================================

/// The graph on `n` vertices with no edges.
pub fn empty_graph(n: usize) -> Result<Graph, GraphError> {
    Graph::empty(n)
}

/// Functional edge update: returns `g` with `uv` present or absent.
pub fn set_edge(g: &Graph, u: usize, v: usize, present: bool) -> Result<Graph, GraphError> {
    g.clone().with_edge(u, v, present)
}

/// `K_{p,q}` with the `p` side first.
pub fn complete_bipartite(p: usize, q: usize) -> Result<Graph, GraphError> {
    blowup(&PatternGraph::single_edge(), &[p, q])
}

/// The blow-up of `h` in which pattern vertex `i` becomes an independent set
/// of `sizes[i]` vertices. Parts are laid out in pattern order, so part `i`
/// occupies the index range `sizes[..i].sum()..sizes[..=i].sum()`.
pub fn blowup(h: &PatternGraph, sizes: &[usize]) -> Result<Graph, GraphError> {
    if sizes.len() != h.k() {
        return Err(GraphError::LengthMismatch {
            expected: h.k(),
            got: sizes.len(),
        });
    }
    let ranges = part_ranges(sizes);
    let n = ranges.last().map_or(0, |r| r.end);
    let mut g = Graph::empty(n)?;
    for &(i, j) in h.edges() {
        for u in ranges[i].clone() {
            for v in ranges[j].clone() {
                g.set_edge_unchecked(u, v, true);
            }
        }
    }
    debug_assert!(g.validate().is_ok());
    Ok(g)
}

/// Index ranges of the parts of a part-major blow-up.
pub fn part_ranges(sizes: &[usize]) -> Vec<std::ops::Range<usize>> {
    let mut start = 0;
    sizes
        .iter()
        .map(|&s| {
            let r = start..start + s;
            start += s;
            r
        })
        .collect()
}

/// Part sizes `(b, b, ⌊(n−4b)/2⌋, b, b, ⌈(n−4b)/2⌉)` of the extremal prism
/// blow-up, or an error unless `n/6 <= b <= n/4`.
pub fn s_bn_sizes(n: usize, b: usize) -> Result<[usize; 6], GraphError> {
    if 6 * b < n || 4 * b > n {
        return Err(GraphError::BookOutOfRange { n, b });
    }
    let rest = n - 4 * b;
    Ok([b, b, rest / 2, b, b, rest.div_ceil(2)])
}

/// The extremal graph `S_{b,n}`: the prism blow-up with sizes
/// [`s_bn_sizes`]. It has `⌊n²/4⌋` edges, book number `b` and `b²(n−4b)`
/// triangles.
pub fn construct_s_bn(n: usize, b: usize) -> Result<Graph, GraphError> {
    let sizes = s_bn_sizes(n, b)?;
    blowup(&PatternGraph::prism(), &sizes)
}
