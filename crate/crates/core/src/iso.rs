//! Isomorphism testing for small graphs by colour refinement with
//! individualisation and backtracking.
//!
//! Both graphs are coloured jointly, so a colour means the same thing on
//! either side. Initial colours come from the degree, refinement splits
//! classes by the multiset of neighbour colours, and when refinement
//! stabilises without a discrete colouring we individualise one vertex of
//! `g` against each candidate of `h` in turn.

use std::collections::BTreeMap;

use crate::graph::Graph;
use crate::invariants::edge_count;

/// True iff some bijection maps the edges of `g` exactly onto those of `h`.
pub fn is_isomorphic_small(g: &Graph, h: &Graph) -> bool {
    if g.n() != h.n() || edge_count(g) != edge_count(h) {
        return false;
    }
    let mut dg = g.degrees();
    let mut dh = h.degrees();
    dg.sort_unstable();
    dh.sort_unstable();
    if dg != dh {
        return false;
    }
    let n = g.n();
    let mut colors: Vec<u32> = g
        .degrees()
        .into_iter()
        .chain(h.degrees())
        .map(|d| d as u32)
        .collect();
    if !refine(g, h, &mut colors) {
        return false;
    }
    search(g, h, colors, n)
}

/// Refines joint colours to a stable partition. Returns false when the two
/// sides stop having identical colour histograms.
fn refine(g: &Graph, h: &Graph, colors: &mut Vec<u32>) -> bool {
    let n = g.n();
    loop {
        let mut sigs: Vec<(u32, Vec<u32>)> = Vec::with_capacity(2 * n);
        for side in 0..2 {
            let (graph, offset) = if side == 0 { (g, 0) } else { (h, n) };
            for v in 0..n {
                let mut nb: Vec<u32> = graph.neighbors(v).map(|w| colors[offset + w]).collect();
                nb.sort_unstable();
                sigs.push((colors[offset + v], nb));
            }
        }
        let mut ids: BTreeMap<&(u32, Vec<u32>), u32> = BTreeMap::new();
        for s in &sigs {
            let next = ids.len() as u32;
            ids.entry(s).or_insert(next);
        }
        // BTreeMap order gives canonical ids independent of vertex order.
        let canon: BTreeMap<&(u32, Vec<u32>), u32> = ids
            .keys()
            .enumerate()
            .map(|(i, k)| (*k, i as u32))
            .collect();
        let new: Vec<u32> = sigs.iter().map(|s| canon[s]).collect();
        let classes_before = count_classes(colors);
        let classes_after = canon.len();
        *colors = new;
        if !same_histogram(colors, n) {
            return false;
        }
        if classes_after == classes_before {
            return true;
        }
    }
}

fn count_classes(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn same_histogram(colors: &[u32], n: usize) -> bool {
    let mut a = colors[..n].to_vec();
    let mut b = colors[n..].to_vec();
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

fn search(g: &Graph, h: &Graph, colors: Vec<u32>, n: usize) -> bool {
    // Pick the smallest non-singleton class on the g side.
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &c in &colors[..n] {
        *counts.entry(c).or_default() += 1;
    }
    let target = counts
        .iter()
        .filter(|(_, &k)| k > 1)
        .min_by_key(|(&c, &k)| (k, c))
        .map(|(&c, _)| c);
    let Some(target) = target else {
        return discrete_match(g, h, &colors, n);
    };
    let v = (0..n)
        .find(|&v| colors[v] == target)
        .expect("class is non-empty");
    let fresh = colors.iter().max().copied().unwrap_or(0) + 1;
    for w in (0..n).filter(|&w| colors[n + w] == target) {
        let mut c = colors.clone();
        c[v] = fresh;
        c[n + w] = fresh;
        if refine(g, h, &mut c) && search(g, h, c, n) {
            return true;
        }
    }
    false
}

fn discrete_match(g: &Graph, h: &Graph, colors: &[u32], n: usize) -> bool {
    let mut by_color = BTreeMap::new();
    for w in 0..n {
        by_color.insert(colors[n + w], w);
    }
    let map: Vec<usize> = (0..n).map(|v| by_color[&colors[v]]).collect();
    g.edge_list()
        .into_iter()
        .all(|(u, v)| h.has_edge(map[u], map[v]))
}
