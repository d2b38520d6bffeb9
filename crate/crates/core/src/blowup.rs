//! Closed-form invariants of pattern blow-ups and the exhaustive check of
//! the triangle bound over all prism blow-ups of a given order.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GraphError, SearchError};
use crate::graph::s_bn_sizes;
use crate::pattern::{prism, PatternGraph};

fn check_len(h: &PatternGraph, sizes: &[u64]) -> Result<(), GraphError> {
    if sizes.len() != h.k() {
        return Err(GraphError::LengthMismatch {
            expected: h.k(),
            got: sizes.len(),
        });
    }
    Ok(())
}

/// `Σ_{uv ∈ E(h)} a_u a_v`.
pub fn blowup_edges(h: &PatternGraph, sizes: &[u64]) -> Result<u64, GraphError> {
    check_len(h, sizes)?;
    Ok(h.edges().iter().map(|&(u, v)| sizes[u] * sizes[v]).sum())
}

/// `Σ` over triangles `uvw` of `h` of `a_u a_v a_w`.
pub fn blowup_triangles(h: &PatternGraph, sizes: &[u64]) -> Result<u64, GraphError> {
    check_len(h, sizes)?;
    Ok(h.triangles()
        .iter()
        .map(|&(u, v, w)| sizes[u] * sizes[v] * sizes[w])
        .sum())
}

/// Largest book of the blow-up: the maximum over pattern edges `uv` whose
/// parts are both non-empty of the total size of their common pattern
/// neighbours.
pub fn blowup_book_number(h: &PatternGraph, sizes: &[u64]) -> Result<u64, GraphError> {
    check_len(h, sizes)?;
    Ok(h.edges()
        .iter()
        .filter(|&&(u, v)| sizes[u] > 0 && sizes[v] > 0)
        .map(|&(u, v)| mask_sum(h.neighbor_mask(u) & h.neighbor_mask(v), sizes))
        .max()
        .unwrap_or(0))
}

fn mask_sum(mut m: u64, sizes: &[u64]) -> u64 {
    let mut s = 0;
    while m != 0 {
        s += sizes[m.trailing_zeros() as usize];
        m &= m - 1;
    }
    s
}

/// All compositions of `n` into six ordered nonnegative parts, in
/// lexicographic order. There are `C(n+5, 5)` of them.
pub fn enumerate_part_vectors(n: u64) -> impl Iterator<Item = [u64; 6]> {
    compositions_with_prefix(n, &[])
}

/// Compositions of `n` into six parts whose leading entries equal `prefix`
/// (at most five entries), in lexicographic order.
fn compositions_with_prefix(n: u64, prefix: &[u64]) -> impl Iterator<Item = [u64; 6]> {
    let p = prefix.len();
    debug_assert!(p < 6);
    let used: u64 = prefix.iter().sum();
    let mut cur = [0u64; 6];
    cur[..p].copy_from_slice(prefix);
    let mut next = (used <= n).then(|| {
        cur[5] = n - used;
        cur
    });
    std::iter::from_fn(move || {
        let out = next?;
        // successor: bump the rightmost free position that still has mass
        // to its right, then push all remaining mass to the last part
        next = (p..5)
            .rev()
            .find(|&i| out[i + 1..].iter().any(|&x| x > 0))
            .map(|i| {
                let mut c = out;
                c[i] += 1;
                c[i + 1..].iter_mut().for_each(|x| *x = 0);
                c[5] = n - c[..=i].iter().sum::<u64>();
                c
            });
        Some(out)
    })
}

fn prism_s(a: &[u64; 6]) -> u64 {
    a[0] * a[1]
        + a[1] * a[2]
        + a[0] * a[2]
        + a[0] * a[3]
        + a[1] * a[4]
        + a[2] * a[5]
        + a[3] * a[4]
        + a[4] * a[5]
        + a[3] * a[5]
}

fn prism_t(a: &[u64; 6]) -> u64 {
    a[0] * a[1] * a[2] + a[3] * a[4] * a[5]
}

/// In the prism only triangle edges have a common neighbour: the third
/// corner of their triangle.
fn prism_book(a: &[u64; 6]) -> u64 {
    let mut best = 0;
    for t in [[0, 1, 2], [3, 4, 5]] {
        for k in 0..3 {
            let (u, v, w) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            if a[u] > 0 && a[v] > 0 {
                best = best.max(a[w]);
            }
        }
    }
    best
}

/// Whether the blow-up is the balanced complete bipartite graph: the
/// non-empty parts induce a connected complete bipartite pattern whose side
/// totals are `⌊n/2⌋` and `⌈n/2⌉`.
pub fn is_balanced_complete_bipartite(h: &PatternGraph, sizes: &[u64]) -> bool {
    if sizes.len() != h.k() {
        return false;
    }
    let support: Vec<usize> = (0..h.k()).filter(|&i| sizes[i] > 0).collect();
    let Some(&start) = support.first() else {
        return false;
    };
    let mut side = vec![None; h.k()];
    side[start] = Some(false);
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &v in &support {
            if h.is_edge(u, v) && side[v].is_none() {
                side[v] = Some(!side[u].expect("visited"));
                stack.push(v);
            }
        }
    }
    if support.iter().any(|&v| side[v].is_none()) {
        return false;
    }
    for (i, &u) in support.iter().enumerate() {
        for &v in &support[i + 1..] {
            // complete between sides, empty within a side
            if h.is_edge(u, v) != (side[u] != side[v]) {
                return false;
            }
        }
    }
    let n: u64 = sizes.iter().sum();
    let x: u64 = support
        .iter()
        .filter(|&&v| side[v] == Some(false))
        .map(|&v| sizes[v])
        .sum();
    let (lo, hi) = (n / 2, n.div_ceil(2));
    (x == lo || x == hi) && x > 0 && x < n
}

/// Result of scanning every prism blow-up of order `n` against book bound `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlowupVerdict {
    pub n: u64,
    pub b: u64,
    pub vectors_scanned: u64,
    /// Vectors with `S(a) ≥ ⌊n²/4⌋` and blow-up book number `≤ b`.
    pub admissible: u64,
    /// Smallest `T(a) > 0` among admissible vectors.
    pub min_t: Option<u64>,
    /// Every admissible vector attaining `min_t`, sorted.
    pub minimizers: Vec<[u64; 6]>,
    /// One representative (the lexicographically smallest) per prism orbit.
    pub minimizer_orbits: Vec<[u64; 6]>,
    pub bound: u64,
    pub zero_t_admissible: u64,
    /// Admissible triangle-free vectors that are not the balanced complete
    /// bipartite graph (expected: none).
    pub zero_t_exceptions: Vec<[u64; 6]>,
    pub conjecture_holds_in_class: bool,
    pub minimizers_are_extremal_orbit: bool,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    scanned: u64,
    admissible: u64,
    min_t: Option<u64>,
    minimizers: Vec<[u64; 6]>,
    zero_t: u64,
    zero_t_exceptions: Vec<[u64; 6]>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.scanned += other.scanned;
        self.admissible += other.admissible;
        self.zero_t += other.zero_t;
        self.zero_t_exceptions.extend(other.zero_t_exceptions);
        match (self.min_t, other.min_t) {
            (_, None) => {}
            (None, Some(_)) => {
                self.min_t = other.min_t;
                self.minimizers = other.minimizers;
            }
            (Some(x), Some(y)) if y < x => {
                self.min_t = other.min_t;
                self.minimizers = other.minimizers;
            }
            (Some(x), Some(y)) if y == x => self.minimizers.extend(other.minimizers),
            _ => {}
        }
        self
    }

    fn visit(&mut self, a: [u64; 6], floor_sq: u64, b: u64, p: &PatternGraph) {
        self.scanned += 1;
        if prism_s(&a) < floor_sq || prism_book(&a) > b {
            return;
        }
        self.admissible += 1;
        let t = prism_t(&a);
        if t == 0 {
            self.zero_t += 1;
            if !is_balanced_complete_bipartite(p, &a) {
                self.zero_t_exceptions.push(a);
            }
            return;
        }
        match self.min_t {
            Some(m) if t > m => {}
            Some(m) if t == m => self.minimizers.push(a),
            _ => {
                self.min_t = Some(t);
                self.minimizers.clear();
                self.minimizers.push(a);
            }
        }
    }
}

/// Scans every composition of `n` into six parts. Requires an integer `b`
/// with `n/6 ≤ b < n/4`.
pub fn verify_conjecture_blowups(n: u64, b: u64) -> Result<BlowupVerdict, SearchError> {
    if 6 * b < n || 4 * b >= n {
        return Err(SearchError::BookOutOfRange {
            n: n as usize,
            b: b as usize,
        });
    }
    let pattern = &prism().graph;
    let floor_sq = n * n / 4;
    // contiguous chunks keyed by the first two entries
    let prefixes: Vec<[u64; 2]> = (0..=n)
        .flat_map(|x| (0..=n - x).map(move |y| [x, y]))
        .collect();
    let mut tally = prefixes
        .par_iter()
        .map(|&prefix| {
            let mut t = Tally::default();
            for a in compositions_with_prefix(n, &prefix) {
                t.visit(a, floor_sq, b, pattern);
            }
            t
        })
        .reduce(Tally::default, Tally::merge);
    tally.minimizers.sort_unstable();
    tally.zero_t_exceptions.sort_unstable();

    let bound = b * b * (n - 4 * b);
    let sizes = s_bn_sizes(n as usize, b as usize).expect("range checked above");
    let extremal = sizes.map(|x| x as u64);
    let orbit = prism().orbit(&extremal);
    let mut reps = BTreeSet::new();
    for a in &tally.minimizers {
        reps.insert(*prism().orbit(a).first().expect("orbit contains a"));
    }
    let minimizers_are_extremal_orbit = tally.minimizers == orbit;
    let conjecture_holds_in_class =
        tally.min_t.is_some_and(|m| m >= bound) && tally.zero_t_exceptions.is_empty();
    Ok(BlowupVerdict {
        n,
        b,
        vectors_scanned: tally.scanned,
        admissible: tally.admissible,
        min_t: tally.min_t,
        minimizers: tally.minimizers,
        minimizer_orbits: reps.into_iter().collect(),
        bound,
        zero_t_admissible: tally.zero_t,
        zero_t_exceptions: tally.zero_t_exceptions,
        conjecture_holds_in_class,
        minimizers_are_extremal_orbit,
    })
}

/// The book bounds scanned for order `n`: `⌈n/6⌉ ..= ⌈n/4⌉ − 1`.
pub fn book_range(n: u64) -> std::ops::RangeInclusive<u64> {
    n.div_ceil(6)..=n.div_ceil(4).saturating_sub(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{s_fn, t_fn, PartVector};
    use crate::graph::{blowup, complete_bipartite, construct_s_bn};
    use crate::invariants::{book_number, edge_count, triangle_count};
    use crate::rng::stream_rng;
    use rand::Rng;

    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn closed_form_examples() {
        let p = PatternGraph::prism();
        assert_eq!(blowup_edges(&p, &[1; 6]).unwrap(), 9);
        let s = construct_s_bn(12, 2).unwrap();
        assert_eq!(blowup_edges(&p, &[2; 6]).unwrap(), edge_count(&s) as u64);
        assert_eq!(
            blowup_edges(&PatternGraph::single_edge(), &[4, 7]).unwrap(),
            28
        );
        assert_eq!(blowup_triangles(&p, &[2; 6]).unwrap(), triangle_count(&s));
        assert_eq!(
            blowup_triangles(&PatternGraph::triangle(), &[2, 3, 5]).unwrap(),
            30
        );
        let c4 = PatternGraph::new(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        assert_eq!(blowup_triangles(&c4, &[3, 3, 3, 3]).unwrap(), 0);
        assert_eq!(blowup_book_number(&c4, &[3, 3, 3, 3]).unwrap(), 0);
        // part 3 empty: the 12 edge has no book, edges 46 and 56 have book 3
        assert_eq!(blowup_book_number(&p, &[3, 3, 0, 3, 3, 1]).unwrap(), 3);
        assert_eq!(
            blowup_book_number(&p, &[3, 3, 0, 3, 3, 1]).unwrap(),
            book_number(&construct_s_bn(13, 3).unwrap()) as u64
        );
        assert!(blowup_edges(&p, &[1, 2]).is_err());
    }

    #[test]
    fn s_bn_book_closed_form() {
        let p = PatternGraph::prism();
        for n in 12..=60u64 {
            for b in n.div_ceil(6)..=n / 4 {
                let sizes = s_bn_sizes(n as usize, b as usize)
                    .unwrap()
                    .map(|x| x as u64);
                // at b = n/4 both third parts are empty and the graph is
                // K_{n/2,n/2}, which has no triangles at all
                let want = if 4 * b == n { 0 } else { b };
                assert_eq!(blowup_book_number(&p, &sizes).unwrap(), want);
                assert_eq!(prism_book(&sizes), want);
            }
        }
    }

    #[test]
    fn enumeration_counts_and_order() {
        assert_eq!(enumerate_part_vectors(0).collect::<Vec<_>>(), vec![[0; 6]]);
        assert_eq!(enumerate_part_vectors(1).count(), 6);
        assert_eq!(enumerate_part_vectors(2).count(), 21);
        assert_eq!(enumerate_part_vectors(12).count(), 6188);
        for n in 0..=15u64 {
            let all: Vec<_> = enumerate_part_vectors(n).collect();
            assert_eq!(all.len() as u64, binom(n + 5, 5));
            assert!(all.iter().all(|a| a.iter().sum::<u64>() == n));
            assert!(all.windows(2).all(|w| w[0] < w[1]), "strictly increasing");
        }
        // prefix chunks cover the full stream exactly
        let n = 9;
        let mut chunked: Vec<_> = (0..=n)
            .flat_map(|x| (0..=n - x).map(move |y| [x, y]))
            .flat_map(|p| compositions_with_prefix(n, &p).collect::<Vec<_>>())
            .collect();
        chunked.sort_unstable();
        assert_eq!(chunked, enumerate_part_vectors(n).collect::<Vec<_>>());
    }

    #[test]
    fn prism_forms_agree_with_calculus() {
        for n in 0..=24u64 {
            for a in enumerate_part_vectors(n) {
                let v = PartVector::from_sizes(&a.map(|x| x as usize));
                assert_eq!(s_fn(&v).to_integer(), prism_s(&a) as i128);
                assert_eq!(t_fn(&v).to_integer(), prism_t(&a) as i128);
            }
        }
    }

    #[test]
    fn closed_forms_match_constructed_graphs() {
        let mut rng = stream_rng(4, 0);
        for _ in 0..2_000 {
            let k = rng.random_range(1..=6usize);
            let mut edges = Vec::new();
            for u in 0..k {
                for v in u + 1..k {
                    if rng.random_bool(0.6) {
                        edges.push((u, v));
                    }
                }
            }
            let h = PatternGraph::new(k, &edges).unwrap();
            let sizes: Vec<u64> = (0..k).map(|_| rng.random_range(0..=8)).collect();
            if sizes.iter().sum::<u64>() == 0 {
                continue;
            }
            let g = blowup(&h, &sizes.iter().map(|&x| x as usize).collect::<Vec<_>>()).unwrap();
            assert_eq!(blowup_edges(&h, &sizes).unwrap(), edge_count(&g) as u64);
            assert_eq!(blowup_triangles(&h, &sizes).unwrap(), triangle_count(&g));
            assert_eq!(
                blowup_book_number(&h, &sizes).unwrap(),
                book_number(&g) as u64
            );
        }
    }

    #[test]
    fn bipartite_detection() {
        let p = PatternGraph::prism();
        // parts 1 and 4 form a matching edge; parts {1,5} vs {2,4} would need 15
        assert!(is_balanced_complete_bipartite(&p, &[6, 0, 0, 6, 0, 0]));
        assert!(is_balanced_complete_bipartite(&p, &[6, 0, 0, 7, 0, 0]));
        assert!(!is_balanced_complete_bipartite(&p, &[5, 0, 0, 7, 0, 0]));
        // parts 1, 2, 4, 5 span the 4-cycle 1-2-5-4, which is K_{2,2}
        assert!(is_balanced_complete_bipartite(&p, &[3, 3, 0, 3, 3, 0]));
        // parts 1, 2, 4 span a path: not complete between its sides
        assert!(!is_balanced_complete_bipartite(&p, &[4, 4, 0, 4, 0, 0]));
        assert!(!is_balanced_complete_bipartite(&p, &[2; 6]));
        let e = PatternGraph::single_edge();
        assert!(is_balanced_complete_bipartite(&e, &[3, 3]));
        assert_eq!(triangle_count(&complete_bipartite(3, 3).unwrap()), 0);
    }

    #[test]
    fn verdict_examples() {
        let v = verify_conjecture_blowups(12, 2).unwrap();
        assert_eq!(v.vectors_scanned, 6188);
        assert_eq!(v.min_t, Some(16));
        assert_eq!(v.minimizers, vec![[2; 6]]);
        assert!(v.conjecture_holds_in_class && v.minimizers_are_extremal_orbit);
        assert!(v.zero_t_exceptions.is_empty());

        let v = verify_conjecture_blowups(13, 3).unwrap();
        assert_eq!(v.min_t, Some(9));
        assert_eq!(v.minimizers.len(), 6);
        assert!(v.minimizers.contains(&[3, 3, 0, 3, 3, 1]));
        assert!(v.minimizers_are_extremal_orbit);

        let v = verify_conjecture_blowups(24, 4).unwrap();
        assert_eq!(v.min_t, Some(128));
        assert!(v.conjecture_holds_in_class && v.minimizers_are_extremal_orbit);

        assert!(verify_conjecture_blowups(24, 6).is_err());
        assert!(verify_conjecture_blowups(24, 3).is_err());
    }

    #[test]
    fn minimizers_closed_under_automorphisms() {
        for n in 12..=20 {
            for b in book_range(n) {
                let v = verify_conjecture_blowups(n, b).unwrap();
                for a in &v.minimizers {
                    for img in prism().orbit(a) {
                        assert!(v.minimizers.binary_search(&img).is_ok());
                    }
                }
            }
        }
    }

    #[test]
    fn book_ranges() {
        assert_eq!(book_range(12), 2..=2);
        assert_eq!(book_range(13), 3..=3);
        assert_eq!(book_range(24), 4..=5);
        assert_eq!(book_range(25), 5..=6);
    }
}
