//! Small pattern graphs and the fixed 3-prism.
//!
//! Pattern vertices are 0-based in code. The prism's parts are referred to
//! 1-based (`W_1..W_6`) in reports, so part `i` lives at index `i - 1`.

use serde::Serialize;

use crate::error::GraphError;

/// The prism edge set, 1-based: two triangles `123`, `456` and the matching
/// `14, 25, 36`.
pub const PRISM_EDGES_ONE_BASED: [(usize, usize); 9] = [
    (1, 2),
    (2, 3),
    (1, 3),
    (1, 4),
    (2, 5),
    (3, 6),
    (4, 5),
    (5, 6),
    (4, 6),
];

/// A pattern graph `H` on `k` vertices with a list of distinct edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternGraph {
    k: usize,
    edges: Vec<(usize, usize)>,
    #[serde(skip)]
    adj: Vec<u64>,
}

impl PatternGraph {
    /// Validates and normalises `edges` (each stored as `(min, max)`).
    pub fn new(k: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if k == 0 || k > 64 {
            return Err(GraphError::InvalidPattern(format!(
                "pattern size {k} outside 1..=64"
            )));
        }
        let mut adj = vec![0u64; k];
        let mut norm = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= k || v >= k {
                return Err(GraphError::InvalidPattern(format!(
                    "edge ({u}, {v}) out of range for k={k}"
                )));
            }
            if u == v {
                return Err(GraphError::InvalidPattern(format!("loop at {u}")));
            }
            if adj[u] >> v & 1 == 1 {
                return Err(GraphError::InvalidPattern(format!(
                    "duplicate edge ({u}, {v})"
                )));
            }
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
            norm.push((u.min(v), u.max(v)));
        }
        Ok(PatternGraph {
            k,
            edges: norm,
            adj,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn is_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u] >> v & 1 == 1
    }

    /// Neighbourhood of pattern vertex `u` as a bit mask.
    #[inline]
    pub fn neighbor_mask(&self, u: usize) -> u64 {
        self.adj[u]
    }

    /// All triangles `(u, v, w)` with `u < v < w`.
    pub fn triangles(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for &(u, v) in &self.edges {
            let mut common =
                self.adj[u] & self.adj[v] & u64::MAX.checked_shl(v as u32 + 1).unwrap_or(0);
            while common != 0 {
                let w = common.trailing_zeros() as usize;
                common &= common - 1;
                out.push((u, v, w));
            }
        }
        out.sort_unstable();
        out
    }

    pub fn single_edge() -> Self {
        PatternGraph::new(2, &[(0, 1)]).expect("valid pattern")
    }

    pub fn triangle() -> Self {
        PatternGraph::new(3, &[(0, 1), (1, 2), (0, 2)]).expect("valid pattern")
    }

    /// The 3-prism on `0..6` (1-based labels shifted down by one).
    pub fn prism() -> Self {
        let edges: Vec<_> = PRISM_EDGES_ONE_BASED
            .iter()
            .map(|&(u, v)| (u - 1, v - 1))
            .collect();
        PatternGraph::new(6, &edges).expect("valid pattern")
    }

    /// Every permutation of `0..k` that maps the edge set onto itself.
    /// Only intended for small `k`.
    pub fn automorphisms(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut perm: Vec<usize> = (0..self.k).collect();
        permutations(&mut perm, 0, &mut |p| {
            if self.edges.iter().all(|&(u, v)| self.is_edge(p[u], p[v])) {
                out.push(p.to_vec());
            }
        });
        out.sort();
        out
    }
}

fn permutations(p: &mut [usize], i: usize, f: &mut impl FnMut(&[usize])) {
    if i == p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permutations(p, i + 1, f);
        p.swap(i, j);
    }
}

/// The fixed prism together with its triangles and automorphism group.
#[derive(Debug, Clone)]
pub struct PrismPattern {
    pub graph: PatternGraph,
    /// `{1,2,3}` and `{4,5,6}`, 0-based.
    pub triangles: [[usize; 3]; 2],
    /// The 12 automorphisms; `perm[i]` is the image of vertex `i`.
    pub automorphisms: Vec<[usize; 6]>,
}

impl PrismPattern {
    pub fn new() -> Self {
        let graph = PatternGraph::prism();
        let automorphisms = graph
            .automorphisms()
            .into_iter()
            .map(|p| [p[0], p[1], p[2], p[3], p[4], p[5]])
            .collect();
        PrismPattern {
            graph,
            triangles: [[0, 1, 2], [3, 4, 5]],
            automorphisms,
        }
    }

    /// Applies an automorphism to a vector indexed by prism vertex: entry `i`
    /// of the input moves to position `perm[i]`.
    pub fn act<T: Copy>(perm: &[usize; 6], a: &[T; 6]) -> [T; 6] {
        let mut out = *a;
        for i in 0..6 {
            out[perm[i]] = a[i];
        }
        out
    }

    /// The orbit of `a` under the automorphism group, deduplicated and sorted.
    pub fn orbit<T: Copy + Ord>(&self, a: &[T; 6]) -> Vec<[T; 6]> {
        let mut out: Vec<_> = self.automorphisms.iter().map(|p| Self::act(p, a)).collect();
        out.sort();
        out.dedup();
        out
    }
}

impl Default for PrismPattern {
    fn default() -> Self {
        Self::new()
    }
}

/// Shared prism instance.
pub fn prism() -> &'static PrismPattern {
    static PRISM: std::sync::OnceLock<PrismPattern> = std::sync::OnceLock::new();
    PRISM.get_or_init(PrismPattern::new)
}
