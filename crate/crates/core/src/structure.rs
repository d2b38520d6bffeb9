//! The stability pipeline: recover an approximate prism blow-up from a graph
//! near the extremal configuration, split the leftover vertices by degree,
//! and evaluate the certificate functions on the resulting part sizes.
//!
//! Parts are indexed `0..6`, index `i` standing for prism vertex `i + 1`.

use std::cmp::Reverse;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::calculus::{f_fn, h1_fn, h2_fn, rat, ser_rational, PartVector, Rational};
use crate::error::StructureError;
use crate::graph::{Graph, VertexSet};
use crate::invariants::codegree;
use crate::pattern::{prism, PrismPattern};

// ----------------------------------------------------------------------------
// Parameters
// ----------------------------------------------------------------------------

/// Thresholds standing in for the asymptotic quantities of the argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityParams {
    /// Degree deviation from `n/2` (as a fraction of `n`) that puts a vertex in R0.
    pub tau0: f64,
    /// Largest admissible `e(N(x,y)) / n²` on the anchor triangles.
    pub tau_tri: f64,
    pub c0: f64,
    /// Bad-set and type threshold.
    pub tau1: f64,
    pub c1: f64,
    /// Book bound used when a certificate is evaluated.
    pub b: Option<u64>,
    /// Repeat the bad-set removal until nothing changes.
    pub iterate_bad_sets: bool,
}

impl Default for StabilityParams {
    fn default() -> Self {
        StabilityParams {
            tau0: 0.05,
            tau_tri: 0.02,
            c0: 2.0,
            tau1: 0.15,
            c1: 2.0,
            b: None,
            iterate_bad_sets: false,
        }
    }
}

impl StabilityParams {
    pub fn validate(&self) -> Result<(), StructureError> {
        for (name, x) in [
            ("tau0", self.tau0),
            ("tau_tri", self.tau_tri),
            ("tau1", self.tau1),
        ] {
            if !(x > 0.0 && x < 1.0) {
                return Err(StructureError::InvalidParams(format!(
                    "{name} must lie in (0, 1), got {x}"
                )));
            }
        }
        for (name, x) in [("c0", self.c0), ("c1", self.c1)] {
            if !(x >= 1.0 && x.is_finite()) {
                return Err(StructureError::InvalidParams(format!(
                    "{name} must be a finite value >= 1, got {x}"
                )));
            }
        }
        Ok(())
    }
}

// ----------------------------------------------------------------------------
// R0 and anchor triangles
// ----------------------------------------------------------------------------

/// Vertices whose degree is at least `tau0 * n` away from `n/2`.
pub fn compute_r0(g: &Graph, tau0: f64) -> VertexSet {
    let n = g.n() as f64;
    VertexSet::from_vertices(
        g.n(),
        (0..g.n()).filter(|&v| (g.degree(v) as f64 - n / 2.0).abs() >= tau0 * n),
    )
}

/// A triangle together with `e(N(x,y))`, `e(N(y,z))`, `e(N(x,z))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AnchorTriangle {
    pub vertices: [usize; 3],
    pub neighborhood_edges: [u64; 3],
    /// Smallest codegree among the three edges.
    pub min_codegree: usize,
}

impl AnchorTriangle {
    fn worst(&self) -> u64 {
        *self.neighborhood_edges.iter().max().unwrap()
    }
}

/// Memoised edge counts of common neighbourhoods.
struct NeighborhoodEdges<'a> {
    g: &'a Graph,
    memo: HashMap<(usize, usize), u64>,
}

impl<'a> NeighborhoodEdges<'a> {
    fn new(g: &'a Graph) -> Self {
        NeighborhoodEdges {
            g,
            memo: HashMap::new(),
        }
    }

    fn get(&mut self, x: usize, y: usize) -> u64 {
        let key = (x.min(y), x.max(y));
        let g = self.g;
        *self.memo.entry(key).or_insert_with(|| {
            let common = VertexSet::from_row(g.row(x)).intersection(&VertexSet::from_row(g.row(y)));
            let twice: usize = common.iter().map(|v| common.count_in(g.row(v))).sum();
            (twice / 2) as u64
        })
    }

    fn triangle(&mut self, x: usize, y: usize, z: usize) -> AnchorTriangle {
        let cd = |u, v| codegree(self.g, u, v);
        AnchorTriangle {
            vertices: [x, y, z],
            neighborhood_edges: [self.get(x, y), self.get(y, z), self.get(x, z)],
            min_codegree: cd(x, y).min(cd(y, z)).min(cd(x, z)),
        }
    }
}

fn keep_better(best: &mut Option<AnchorTriangle>, cand: AnchorTriangle, limit: f64) {
    if cand.worst() as f64 > limit {
        return;
    }
    let better = match best {
        None => true,
        Some(b) => {
            (cand.worst(), Reverse(cand.min_codegree), cand.vertices)
                < (b.worst(), Reverse(b.min_codegree), b.vertices)
        }
    };
    if better {
        *best = Some(cand);
    }
}

/// The triangle avoiding `excluded` whose largest common-neighbourhood edge
/// count is smallest, provided it is at most `tau_tri * n²`. Ties go to the
/// largest smallest codegree, then to the lexicographically first triple.
pub fn select_good_triangle(
    g: &Graph,
    excluded: &VertexSet,
    tau_tri: f64,
) -> Option<AnchorTriangle> {
    let n = g.n();
    let limit = tau_tri * (n * n) as f64;
    let allowed = VertexSet::from_vertices(n, (0..n).filter(|&v| !excluded.contains(v)));
    let mut counts = NeighborhoodEdges::new(g);
    let mut best = None;
    for x in allowed.iter() {
        let nx = allowed.intersection(&VertexSet::from_row(g.row(x)));
        for y in nx.iter().filter(|&y| y > x) {
            let nxy = nx.intersection(&VertexSet::from_row(g.row(y)));
            for z in nxy.iter().filter(|&z| z > y) {
                let cand = counts.triangle(x, y, z);
                keep_better(&mut best, cand, limit);
            }
        }
    }
    best
}

/// Second anchor: `x4` from `w4`, an edge `x5 < x6` inside `b` completing a
/// triangle with it.
fn select_second_anchor(
    g: &Graph,
    w4: &VertexSet,
    b: &VertexSet,
    tau_tri: f64,
) -> Option<AnchorTriangle> {
    let n = g.n();
    let limit = tau_tri * (n * n) as f64;
    let mut counts = NeighborhoodEdges::new(g);
    let mut best = None;
    for x4 in w4.iter() {
        let nb = b.intersection(&VertexSet::from_row(g.row(x4)));
        for x5 in nb.iter() {
            let pair = nb.intersection(&VertexSet::from_row(g.row(x5)));
            for x6 in pair.iter().filter(|&x6| x6 > x5) {
                let cand = counts.triangle(x4, x5, x6);
                keep_better(&mut best, cand, limit);
            }
        }
    }
    best
}

// ----------------------------------------------------------------------------
// Decomposition
// ----------------------------------------------------------------------------

/// Exact counts describing how far the decomposition is from a prism blow-up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    /// `|W_i| - n/6`.
    #[serde(serialize_with = "ser_rational_array")]
    pub size_deviation: [Rational; 6],
    pub within_part_edges: [u64; 6],
    /// Edges between distinct parts that are not adjacent in the prism.
    pub non_prism_edges: u64,
    /// Smallest `d_{W_j}(x)` over `x` in `W_i` and prism edges `ij`.
    pub min_prism_degree: Option<usize>,
    pub b1_removed: usize,
    pub b2_removed: usize,
    /// Vertices sent to R because their type disagreed with the orientation.
    pub type_dissenters: usize,
}

impl Diagnostics {
    /// Within-part plus non-prism edges; zero means `G - R` sits inside the
    /// prism blow-up spanned by the parts.
    pub fn violations(&self) -> u64 {
        self.within_part_edges.iter().sum::<u64>() + self.non_prism_edges
    }
}

fn ser_rational_array<S: serde::Serializer>(a: &[Rational; 6], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(a.iter().map(|x| x.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionResult {
    pub n: usize,
    pub parts: [VertexSet; 6],
    pub exceptional: VertexSet,
    pub r0: VertexSet,
    pub anchors: [AnchorTriangle; 2],
    /// Prism automorphism applied to the construction's labels: part `i` of
    /// the construction became part `relabeling[i]`.
    pub relabeling: [usize; 6],
    /// Whether the orientation vote exchanged the construction's W5 and W6.
    pub swapped_56: bool,
    pub diagnostics: Diagnostics,
    pub params: StabilityParams,
}

impl DecompositionResult {
    /// Part index of every vertex, `None` for R.
    pub fn labels(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.n];
        for (i, part) in self.parts.iter().enumerate() {
            for v in part.iter() {
                out[v] = Some(i);
            }
        }
        out
    }

    /// Fraction of vertices lying in a part whose majority comes from the
    /// same reference class. Vertices in R count as misplaced.
    pub fn agreement(&self, reference: &[VertexSet]) -> f64 {
        let hits: usize = self
            .parts
            .iter()
            .map(|p| {
                reference
                    .iter()
                    .map(|r| p.intersection(r).len())
                    .max()
                    .unwrap_or(0)
            })
            .sum();
        hits as f64 / self.n as f64
    }

    /// True iff the parts and R are pairwise disjoint and cover every vertex.
    pub fn is_partition(&self) -> bool {
        let mut seen = VertexSet::empty(self.n);
        let mut total = 0;
        for s in self.parts.iter().chain(std::iter::once(&self.exceptional)) {
            total += s.len();
            seen = seen.union(s);
        }
        total == self.n && seen.len() == self.n
    }
}

fn deg_in(g: &Graph, set: &VertexSet, x: usize) -> usize {
    set.count_in(g.row(x))
}

fn filter(set: &VertexSet, keep: impl Fn(usize) -> bool) -> VertexSet {
    VertexSet::from_vertices(set.as_row().len() * 64, set.iter().filter(|&v| keep(v)))
}

/// `B1` and `B2` for the current parts (0-based, construction labels).
fn bad_sets(g: &Graph, w: &[VertexSet; 6], tau1: f64) -> (VertexSet, VertexSet) {
    let n = g.n();
    let hi = tau1 * n as f64;
    let lo = (1.0 / 6.0 - tau1) * n as f64;
    let mut b1 = VertexSet::empty(n);
    let mut b2 = VertexSet::empty(n);
    // (part, first partner, second partner) for B1; (part, mate) for B2
    for (own, p, q) in [(1, 4, 5), (2, 4, 5), (4, 1, 2), (5, 1, 2)] {
        for x in w[own].iter() {
            if deg_in(g, &w[p], x) as f64 >= hi && deg_in(g, &w[q], x) as f64 >= hi {
                b1.insert(x);
            }
        }
    }
    for (own, mate) in [(1, 2), (2, 1), (4, 5), (5, 4)] {
        for x in w[own].iter() {
            if deg_in(g, &w[mate], x) as f64 <= lo {
                b2.insert(x);
            }
        }
    }
    (b1, b2)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    First,
    Second,
    Untyped,
}

/// Type of `x` with respect to the pair `(w[p], w[q])`: the part it barely
/// sees, when that is unambiguous.
fn vertex_type(g: &Graph, w: &[VertexSet; 6], p: usize, q: usize, x: usize, hi: f64) -> Side {
    let dp = deg_in(g, &w[p], x);
    let dq = deg_in(g, &w[q], x);
    if dp.min(dq) as f64 > hi || dp == dq {
        Side::Untyped
    } else if dp < dq {
        Side::First
    } else {
        Side::Second
    }
}

/// Orients W5/W6 against W2/W3 by majority vote and returns the dissenters
/// together with whether W5 and W6 were exchanged.
fn orient(g: &Graph, w: &mut [VertexSet; 6], tau1: f64) -> (VertexSet, bool) {
    let hi = tau1 * g.n() as f64;
    // (part, pair, expected side): W2 sees no W6, W3 no W5, W5 no W3, W6 no W2
    let expect = [
        (1, (4, 5), Side::Second),
        (2, (4, 5), Side::First),
        (4, (1, 2), Side::Second),
        (5, (1, 2), Side::First),
    ];
    let mut keep = 0usize;
    let mut swap = 0usize;
    for &(own, (p, q), want) in &expect {
        for x in w[own].iter() {
            match vertex_type(g, w, p, q, x, hi) {
                Side::Untyped => {}
                s if s == want => keep += 1,
                _ => swap += 1,
            }
        }
    }
    let swapped = swap > keep;
    if swapped {
        w.swap(4, 5);
    }
    let mut dissenters = VertexSet::empty(g.n());
    for &(own, (p, q), want) in &expect {
        for x in w[own].iter() {
            if vertex_type(g, w, p, q, x, hi) != want {
                dissenters.insert(x);
            }
        }
    }
    for part in w.iter_mut() {
        *part = part.difference(&dissenters);
    }
    (dissenters, swapped)
}

fn diagnostics(g: &Graph, w: &[VertexSet; 6], b1: usize, b2: usize, dissent: usize) -> Diagnostics {
    let n = g.n() as i128;
    let pattern = &prism().graph;
    let mut within = [0u64; 6];
    let mut non_prism = 0u64;
    let mut min_deg: Option<usize> = None;
    for i in 0..6 {
        for x in w[i].iter() {
            within[i] += deg_in(g, &w[i], x) as u64;
            for j in 0..6 {
                if j == i {
                    continue;
                }
                let d = deg_in(g, &w[j], x);
                if pattern.is_edge(i, j) {
                    min_deg = Some(min_deg.map_or(d, |m| m.min(d)));
                } else if j > i {
                    non_prism += d as u64;
                }
            }
        }
        within[i] /= 2;
    }
    Diagnostics {
        size_deviation: std::array::from_fn(|i| rat(w[i].len() as i128) - Rational::new(n, 6)),
        within_part_edges: within,
        non_prism_edges: non_prism,
        min_prism_degree: min_deg,
        b1_removed: b1,
        b2_removed: b2,
        type_dissenters: dissent,
    }
}

/// Picks the prism automorphism whose relabeled parts have the
/// lexicographically smallest sequence of minimum vertices (empty parts last).
fn canonical_relabeling(w: &[VertexSet; 6]) -> [usize; 6] {
    let mins: [usize; 6] = std::array::from_fn(|i| w[i].iter().next().unwrap_or(usize::MAX));
    *prism()
        .automorphisms
        .iter()
        .min_by_key(|p| PrismPattern::act(p, &mins))
        .expect("the prism has automorphisms")
}

/// Runs the anchor-triangle construction on `g`.
pub fn decompose_prism(
    g: &Graph,
    params: &StabilityParams,
) -> Result<DecompositionResult, StructureError> {
    params.validate()?;
    let n = g.n();
    let nf = n as f64;
    let all = VertexSet::from_vertices(n, 0..n);
    let r0 = compute_r0(g, params.tau0);

    let first =
        select_good_triangle(g, &r0, params.tau_tri).ok_or(StructureError::NoFirstAnchor)?;
    let [x1, x2, x3] = first.vertices;
    let nbhd = |v: usize| VertexSet::from_row(g.row(v));
    let a = nbhd(x1).difference(&r0);
    let b = all.difference(&a).difference(&r0);
    let w2 = a.intersection(&nbhd(x3));
    let w3 = a.intersection(&nbhd(x2));
    let heavy = (0.5 - params.c0 * params.tau0) * nf;
    let w4 = filter(&a, |x| deg_in(g, &b, x) as f64 >= heavy).difference(&w2.union(&w3));

    let second =
        select_second_anchor(g, &w4, &b, params.tau_tri).ok_or(StructureError::NoSecondAnchor)?;
    let [x4, x5, x6] = second.vertices;
    let b_prime = b.intersection(&nbhd(x4));
    let w5 = b_prime.intersection(&nbhd(x6));
    let w6 = b_prime.intersection(&nbhd(x5));
    let w1 = filter(&b_prime, |y| deg_in(g, &a, y) as f64 >= heavy).difference(&w5.union(&w6));

    let mut w = [w1, w2, w3, w4, w5, w6];
    let doubled23 = w[1].intersection(&w[2]);
    let doubled56 = w[4].intersection(&w[5]);
    for i in [1, 2] {
        w[i] = w[i].difference(&doubled23);
    }
    for i in [4, 5] {
        w[i] = w[i].difference(&doubled56);
    }

    let mut b1_removed = 0;
    let mut b2_removed = 0;
    loop {
        let (b1, b2) = bad_sets(g, &w, params.tau1);
        let bad = b1.union(&b2);
        if bad.is_empty() {
            break;
        }
        b1_removed += b1.len();
        b2_removed += b2.difference(&b1).len();
        for part in w.iter_mut() {
            *part = part.difference(&bad);
        }
        if !params.iterate_bad_sets {
            break;
        }
    }

    let (dissenters, swapped_56) = orient(g, &mut w, params.tau1);

    let relabeling = canonical_relabeling(&w);
    let parts = PrismPattern::act(&relabeling, &w.each_ref()).map(|s| s.clone());
    let covered = parts
        .iter()
        .fold(VertexSet::empty(n), |acc, p| acc.union(p));
    let exceptional = all.difference(&covered);
    let diagnostics = diagnostics(g, &parts, b1_removed, b2_removed, dissenters.len());
    let result = DecompositionResult {
        n,
        parts,
        exceptional,
        r0,
        anchors: [first, second],
        relabeling,
        swapped_56,
        diagnostics,
        params: *params,
    };
    assert!(
        result.is_partition(),
        "decomposition must partition the vertex set"
    );
    Ok(result)
}

// ----------------------------------------------------------------------------
// Exceptional vertices
// ----------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhiChoice {
    pub vertex: usize,
    pub part: usize,
    /// Every part index whose forbidden parts `x` does not see.
    pub candidates: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExceptionalSplit {
    pub r1: VertexSet,
    pub r2: VertexSet,
    pub r3: VertexSet,
    pub phi: Vec<PhiChoice>,
    /// Vertices of R2 ∪ R3 with no admissible part.
    pub phi_violations: Vec<usize>,
    /// Sizes of the parts after adding the R3 vertices to their chosen part.
    pub a: PartVector,
    pub r: u64,
}

/// Splits R by degree, assigns a part to each vertex of R2 ∪ R3, and counts
/// the augmented parts.
pub fn classify_exceptional(
    g: &Graph,
    dec: &DecompositionResult,
    params: &StabilityParams,
) -> Result<ExceptionalSplit, StructureError> {
    params.validate()?;
    if dec.n != g.n() {
        return Err(StructureError::Mismatch(format!(
            "decomposition has {} vertices, graph has {}",
            dec.n,
            g.n()
        )));
    }
    if !dec.is_partition() {
        return Err(StructureError::Mismatch(
            "parts and R do not partition V(G)".into(),
        ));
    }
    let n = g.n();
    let nf = n as f64;
    let shift = params.c1 * params.tau1;
    let t1 = (1.0 / 3.0 + shift) * nf;
    let t2 = (5.0 / 12.0 + shift) * nf;
    let mut r1 = VertexSet::empty(n);
    let mut r2 = VertexSet::empty(n);
    let mut r3 = VertexSet::empty(n);
    for x in dec.exceptional.iter() {
        let d = g.degree(x) as f64;
        if d < t1 {
            r1.insert(x);
        } else if d < t2 {
            r2.insert(x);
        } else {
            r3.insert(x);
        }
    }

    let pattern = &prism().graph;
    let mut phi = Vec::new();
    let mut phi_violations = Vec::new();
    let mut sizes: [usize; 6] = std::array::from_fn(|i| dec.parts[i].len());
    for x in r2.union(&r3).iter() {
        let d: [usize; 6] = std::array::from_fn(|j| deg_in(g, &dec.parts[j], x));
        let candidates: Vec<usize> = (0..6)
            .filter(|&i| (0..6).all(|j| pattern.is_edge(i, j) || d[j] == 0))
            .collect();
        let score = |i: usize| {
            (0..6)
                .filter(|&j| pattern.is_edge(i, j))
                .map(|j| d[j])
                .sum::<usize>()
        };
        // ties go to the smaller index
        let Some(part) = candidates
            .iter()
            .copied()
            .max_by_key(|&i| (score(i), std::cmp::Reverse(i)))
        else {
            phi_violations.push(x);
            continue;
        };
        if r3.contains(x) {
            sizes[part] += 1;
        }
        phi.push(PhiChoice {
            vertex: x,
            part,
            candidates,
        });
    }
    Ok(ExceptionalSplit {
        r: (r1.len() + r2.len()) as u64,
        r1,
        r2,
        r3,
        phi,
        phi_violations,
        a: PartVector::from_sizes(&sizes),
    })
}

// ----------------------------------------------------------------------------
// Certificate
// ----------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    /// The part vector after normalisation.
    pub a: PartVector,
    pub b: u64,
    pub r: u64,
    #[serde(serialize_with = "ser_rational")]
    pub f: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub h1: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub h2: Rational,
    /// Signs of F, H1, H2 as -1, 0 or 1.
    pub signs: [i8; 3],
}

fn sign(q: Rational) -> i8 {
    match q.cmp(&rat(0)) {
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Greater => 1,
    }
}

/// The lexicographically largest image of `a` under the prism automorphisms
/// with a maximal first entry and `a_1 >= a_2 >= a_3`.
pub fn normalize_parts(a: &PartVector) -> PartVector {
    let max = a.max_entry();
    prism()
        .automorphisms
        .iter()
        .map(|p| PrismPattern::act(p, a.entries()))
        .filter(|e| e[0] == max && e[1] >= e[2])
        .max()
        .map(|e| PartVector::new(e).expect("entries stay nonnegative"))
        .expect("some automorphism moves the maximum first")
}

/// F, H1 and H2 at the normalised part vector.
pub fn certificate_for(a: &PartVector, b: u64, r: u64) -> Certificate {
    let a = normalize_parts(a);
    let bq = rat(b as i128);
    let f = f_fn(&a, bq);
    let h1 = h1_fn(&a, r);
    let h2 = h2_fn(&a, bq, r);
    Certificate {
        a,
        b,
        r,
        f,
        h1,
        h2,
        signs: [sign(f), sign(h1), sign(h2)],
    }
}

pub fn evaluate_certificate(split: &ExceptionalSplit, b: u64) -> Certificate {
    certificate_for(&split.a, b, split.r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{blowup, complete_bipartite, construct_s_bn, part_ranges, s_bn_sizes};
    use crate::pattern::PatternGraph;
    use rand::Rng;

    fn classes(n: usize, b: usize) -> Vec<VertexSet> {
        let sizes = s_bn_sizes(n, b).unwrap();
        part_ranges(&sizes)
            .into_iter()
            .map(|r| VertexSet::from_vertices(n, r))
            .collect()
    }

    fn complete(n: usize) -> Graph {
        let edges: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn r0_examples() {
        assert!(compute_r0(&construct_s_bn(12, 2).unwrap(), 0.05).is_empty());
        let star = Graph::from_edges(10, &(1..10).map(|v| (0, v)).collect::<Vec<_>>()).unwrap();
        assert_eq!(compute_r0(&star, 0.1).len(), 10);
        assert!(compute_r0(&complete_bipartite(6, 6).unwrap(), 0.05).is_empty());
    }

    #[test]
    fn good_triangle_examples() {
        let g = construct_s_bn(12, 2).unwrap();
        let t = select_good_triangle(&g, &VertexSet::empty(12), 0.02).unwrap();
        // parts are 0..2, 2..4, 4..6, ...; the first triangle takes the first
        // vertex of each of the first three parts
        assert_eq!(t.vertices, [0, 2, 4]);
        assert_eq!(t.neighborhood_edges, [0, 0, 0]);
        assert!(select_good_triangle(
            &complete_bipartite(6, 6).unwrap(),
            &VertexSet::empty(12),
            0.5
        )
        .is_none());
        // in K5 every common neighbourhood is a triangle: 3 edges > 0.1 * 25
        assert!(select_good_triangle(&complete(5), &VertexSet::empty(5), 0.1).is_none());
        assert!(select_good_triangle(&complete(5), &VertexSet::empty(5), 0.2).is_some());
    }

    #[test]
    fn neighborhood_edge_counts_match_brute_force() {
        let mut rng = crate::rng::stream_rng(5, 0);
        for _ in 0..20 {
            let n = rng.random_range(4..30);
            let mut g = Graph::empty(n).unwrap();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random_bool(0.5) {
                        g.set_edge(u, v, true).unwrap();
                    }
                }
            }
            let mut counts = NeighborhoodEdges::new(&g);
            for (x, y) in g.edge_list() {
                let common: Vec<usize> = (0..n)
                    .filter(|&v| g.has_edge(x, v) && g.has_edge(y, v))
                    .collect();
                let mut e = 0;
                for (i, &u) in common.iter().enumerate() {
                    for &v in &common[i + 1..] {
                        e += g.has_edge(u, v) as u64;
                    }
                }
                assert_eq!(counts.get(x, y), e);
            }
        }
    }

    #[test]
    fn exact_recovery_s_4_24() {
        let g = construct_s_bn(24, 4).unwrap();
        let dec = decompose_prism(&g, &StabilityParams::default()).unwrap();
        assert!(dec.exceptional.is_empty());
        assert_eq!(dec.diagnostics.violations(), 0);
        assert_eq!(dec.parts.to_vec(), classes(24, 4));
        assert_eq!(dec.agreement(&classes(24, 4)), 1.0);
        assert_eq!(dec.diagnostics.min_prism_degree, Some(4));
        assert!(dec.diagnostics.size_deviation.iter().all(|d| *d == rat(0)));
    }

    #[test]
    fn recovery_under_relabeling() {
        let g = construct_s_bn(30, 6).unwrap();
        let mut perm: Vec<usize> = (0..30).collect();
        perm.reverse();
        let h = g.permuted(&perm).unwrap();
        let dec = decompose_prism(&h, &StabilityParams::default()).unwrap();
        assert_eq!(dec.diagnostics.violations(), 0);
        assert!(dec.exceptional.is_empty());
        let mut sizes: Vec<usize> = dec.parts.iter().map(|p| p.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3, 6, 6, 6, 6]);
    }

    #[test]
    fn stray_edge_does_not_anchor() {
        // 1 in W1 and 17 in W5 close the triangle 12-1-17 with a weak edge
        let g = construct_s_bn(24, 4)
            .unwrap()
            .with_edge(1, 17, true)
            .unwrap();
        let dec = decompose_prism(&g, &StabilityParams::default()).unwrap();
        assert_eq!(dec.anchors[1].vertices, [12, 16, 20]);
        assert_eq!(dec.anchors[1].min_codegree, 4);
        assert!(dec.agreement(&classes(24, 4)) >= 22.0 / 24.0);
    }

    #[test]
    fn perturbed_s_4_24() {
        let mut g = construct_s_bn(24, 4).unwrap();
        let mut rng = crate::rng::stream_rng(2024, 0);
        let mut flipped = 0;
        while flipped < 5 {
            let u = rng.random_range(0..24);
            let v = rng.random_range(0..24);
            if u != v {
                let present = g.has_edge(u, v);
                g.set_edge(u, v, !present).unwrap();
                flipped += 1;
            }
        }
        let dec = decompose_prism(&g, &StabilityParams::default()).unwrap();
        assert!(dec.agreement(&classes(24, 4)) >= 0.9);
    }

    #[test]
    fn triangle_free_input_fails_at_first_anchor() {
        let err = decompose_prism(
            &complete_bipartite(12, 12).unwrap(),
            &StabilityParams::default(),
        )
        .unwrap_err();
        assert_eq!(err, StructureError::NoFirstAnchor);
        assert_eq!(err.step(), "first_anchor");
    }

    #[test]
    fn one_triangle_class_fails_at_second_anchor() {
        // n - 4b = 1 leaves the third part empty
        let g = construct_s_bn(21, 5).unwrap();
        assert_eq!(
            decompose_prism(&g, &StabilityParams::default()).unwrap_err(),
            StructureError::NoSecondAnchor
        );
    }

    #[test]
    fn params_validation() {
        let mut p = StabilityParams::default();
        assert!(p.validate().is_ok());
        p.tau1 = 1.0;
        assert!(p.validate().is_err());
        p = StabilityParams {
            c0: 0.5,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let parsed: StabilityParams = serde_json::from_str(r#"{"tau1": 0.02}"#).unwrap();
        assert_eq!(parsed.tau1, 0.02);
        assert_eq!(parsed.tau0, 0.05);
        assert!(serde_json::from_str::<StabilityParams>(r#"{"tau9": 1}"#).is_err());
    }

    #[test]
    fn classify_clean_graph() {
        let g = construct_s_bn(12, 2).unwrap();
        // n = 12 is below the recovery range of the defaults; build the
        // decomposition from the known classes instead
        let parts: [VertexSet; 6] = classes(12, 2).try_into().unwrap();
        let dec = DecompositionResult {
            n: 12,
            parts,
            exceptional: VertexSet::empty(12),
            r0: VertexSet::empty(12),
            anchors: [select_good_triangle(&g, &VertexSet::empty(12), 0.02).unwrap(); 2],
            relabeling: [0, 1, 2, 3, 4, 5],
            swapped_56: false,
            diagnostics: diagnostics(&g, &classes(12, 2).try_into().unwrap(), 0, 0, 0),
            params: StabilityParams::default(),
        };
        let split = classify_exceptional(&g, &dec, &StabilityParams::default()).unwrap();
        assert!(split.r1.is_empty() && split.r2.is_empty() && split.r3.is_empty());
        assert_eq!(split.a, PartVector::from_ints([2; 6]).unwrap());
        assert_eq!(split.r, 0);
        let cert = evaluate_certificate(&split, 2);
        assert_eq!((cert.f, cert.h1, cert.h2), (rat(0), rat(0), rat(0)));
    }

    #[test]
    fn classify_vertex_with_part_four_pattern() {
        let base = construct_s_bn(24, 4).unwrap();
        let sizes = s_bn_sizes(24, 4).unwrap();
        let ranges = part_ranges(&sizes);
        let mut edges = base.edge_list();
        for p in [0, 4, 5] {
            edges.extend(ranges[p].clone().map(|v| (v, 24)));
        }
        let g = Graph::from_edges(25, &edges).unwrap();
        let params = StabilityParams {
            tau1: 0.02,
            ..Default::default()
        };
        let mut dec = decompose_prism(&g, &params).unwrap();
        // the new vertex is indistinguishable from part 4; move it to R
        for p in dec.parts.iter_mut() {
            p.remove(24);
        }
        dec.exceptional.insert(24);
        let split = classify_exceptional(&g, &dec, &params).unwrap();
        assert!(split.r3.contains(24));
        assert_eq!(split.phi.len(), 1);
        assert_eq!(split.phi[0].part, 3);
        assert_eq!(split.phi[0].candidates, vec![3]);
        assert_eq!(split.a[3], rat(5));
    }

    #[test]
    fn classify_universal_vertex_is_a_violation() {
        let base = construct_s_bn(24, 4).unwrap();
        let mut edges = base.edge_list();
        edges.extend((0..24).map(|v| (v, 24)));
        let g = Graph::from_edges(25, &edges).unwrap();
        let params = StabilityParams::default();
        let mut dec = decompose_prism(&base, &params).unwrap();
        dec.n = 25;
        for p in dec.parts.iter_mut() {
            *p = VertexSet::from_vertices(25, p.iter());
        }
        dec.exceptional = VertexSet::from_vertices(25, [24]);
        let split = classify_exceptional(&g, &dec, &params).unwrap();
        assert_eq!(split.phi_violations, vec![24]);
        assert!(split.phi.is_empty());
        for choice in &split.phi {
            for j in 0..6 {
                if !prism().graph.is_edge(choice.part, j) {
                    assert_eq!(deg_in(&g, &dec.parts[j], choice.vertex), 0);
                }
            }
        }
    }

    #[test]
    fn classify_rejects_mismatched_input() {
        let g = construct_s_bn(24, 4).unwrap();
        let dec = decompose_prism(&g, &StabilityParams::default()).unwrap();
        let h = construct_s_bn(25, 5).unwrap();
        assert!(matches!(
            classify_exceptional(&h, &dec, &StabilityParams::default()),
            Err(StructureError::Mismatch(_))
        ));
    }

    /// Certificate functions written out from their definitions.
    fn oracle(a: [i128; 6], b: i128, r: i128) -> (Rational, Rational, Rational) {
        let edges = [
            (0, 1),
            (1, 2),
            (0, 2),
            (0, 3),
            (1, 4),
            (2, 5),
            (3, 4),
            (4, 5),
            (3, 5),
        ];
        let s: i128 = edges.iter().map(|&(i, j)| a[i] * a[j]).sum();
        let t = a[0] * a[1] * a[2] + a[3] * a[4] * a[5];
        let n1: i128 = a.iter().sum();
        let q = n1 * n1 / 4;
        let f = rat(t - a[0] * (s - q) - b * b * (n1 - 4 * b));
        let h1 = rat(s - q) - Rational::new(n1 * r, 12);
        let h2 = rat(s - a[2] * (a[0] - b) - q) - Rational::new(n1 * r, 12);
        (f, h1, h2)
    }

    #[test]
    fn certificate_example() {
        let a = PartVector::from_ints([3, 2, 2, 2, 2, 1]).unwrap();
        let c = certificate_for(&a, 2, 0);
        assert_eq!(c.a, a);
        assert_eq!((c.f, c.h1, c.h2), oracle([3, 2, 2, 2, 2, 1], 2, 0));
        assert_eq!(c.signs, [0, 0, -1]);
    }

    #[test]
    fn normalization_picks_orbit_representative() {
        let mut rng = crate::rng::stream_rng(9, 1);
        for _ in 0..200 {
            let a: [usize; 6] = std::array::from_fn(|_| rng.random_range(0..9));
            let v = PartVector::from_sizes(&a);
            let m = normalize_parts(&v);
            let e = m.entries();
            assert_eq!(e[0], v.max_entry());
            assert!(e[1] >= e[2]);
            assert!(prism().orbit(v.entries()).contains(e));
            let ints = m.to_integers().unwrap();
            let r = rng.random_range(0..5);
            let c = certificate_for(&v, 3, r);
            assert_eq!((c.f, c.h1, c.h2), oracle(ints, 3, r as i128));
        }
    }

    #[test]
    fn extremal_vectors_have_zero_certificate() {
        for n in 12usize..=60 {
            for b in n.div_ceil(6)..=n / 4 {
                let sizes = s_bn_sizes(n, b).unwrap();
                let c = certificate_for(&PartVector::from_sizes(&sizes), b as u64, 0);
                assert_eq!((c.f, c.h1, c.h2), (rat(0), rat(0), rat(0)), "n={n} b={b}");
            }
        }
    }

    #[test]
    fn blowup_of_other_vectors_keeps_parts() {
        let g = blowup(&PatternGraph::prism(), &[5, 5, 4, 5, 5, 4]).unwrap();
        let dec = decompose_prism(&g, &StabilityParams::default()).unwrap();
        assert_eq!(dec.diagnostics.violations(), 0);
        assert!(dec.exceptional.is_empty());
    }

    #[test]
    fn recovery_over_clean_range() {
        for n in 18usize..=60 {
            for b in n.div_ceil(6)..=n / 4 {
                let g = construct_s_bn(n, b).unwrap();
                match n - 4 * b {
                    0 => assert_eq!(
                        decompose_prism(&g, &StabilityParams::default()).unwrap_err(),
                        StructureError::NoFirstAnchor
                    ),
                    1 => assert_eq!(
                        decompose_prism(&g, &StabilityParams::default()).unwrap_err(),
                        StructureError::NoSecondAnchor
                    ),
                    _ => {
                        let dec = decompose_prism(&g, &StabilityParams::default()).unwrap();
                        assert_eq!(dec.parts.to_vec(), classes(n, b), "n={n} b={b}");
                        assert_eq!(dec.diagnostics.violations(), 0);
                    }
                }
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn decomposition_is_a_partition(
            n in 18usize..=40,
            seed in proptest::prelude::any::<u64>(),
            flips in 0usize..12,
        ) {
            let b = n.div_ceil(6);
            let mut g = construct_s_bn(n, b).unwrap();
            let mut rng = crate::rng::stream_rng(seed, 1);
            for _ in 0..flips {
                let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
                if u != v {
                    let present = g.has_edge(u, v);
                    g.set_edge(u, v, !present).unwrap();
                }
            }
            let params = StabilityParams::default();
            if let Ok(d) = decompose_prism(&g, &params) {
                proptest::prop_assert!(d.is_partition());
                let labelled = d.labels().iter().filter(|l| l.is_some()).count();
                proptest::prop_assert_eq!(labelled + d.exceptional.len(), n);
                let split = classify_exceptional(&g, &d, &params).unwrap();
                let r_total = split.r1.len() + split.r2.len() + split.r3.len();
                proptest::prop_assert_eq!(r_total, d.exceptional.len());
                proptest::prop_assert_eq!(split.r, (split.r1.len() + split.r2.len()) as u64);
            }
        }

        #[test]
        fn certificate_is_orbit_invariant(
            a in proptest::array::uniform6(0i64..12),
            b in 1u64..6,
            r in 0u64..4,
            which in 0usize..12,
        ) {
            let v = PartVector::from_ints(a).unwrap();
            let perm = &prism().automorphisms[which];
            let image = PartVector::new(PrismPattern::act(perm, v.entries())).unwrap();
            proptest::prop_assert_eq!(certificate_for(&v, b, r), certificate_for(&image, b, r));
        }
    }
}
