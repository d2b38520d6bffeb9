//! Exact graph invariants: edges, codegrees, triangles, books, 4-cliques,
//! the triangle-plus-isolated-vertex count, and the Bollobás–Nikiforov
//! inequality. Everything is integer arithmetic over bit rows.

use std::ops::{Add, Mul, Sub};

use serde::Serialize;

use crate::graph::{and_count, iter_bits, Graph};

pub fn edge_count(g: &Graph) -> usize {
    (0..g.n()).map(|v| g.degree(v)).sum::<usize>() / 2
}

/// Number of common neighbours of `u` and `v`.
///
/// # Panics
/// If `u` or `v` is not a vertex of `g`.
pub fn codegree(g: &Graph, u: usize, v: usize) -> usize {
    assert!(u < g.n() && v < g.n(), "vertex out of range");
    and_count(g.row(u), g.row(v))
}

pub fn triangle_count(g: &Graph) -> u64 {
    if g.words() == 1 {
        return triangle_count_rows(&rows64(g));
    }
    let mut sum = 0u64;
    for u in 0..g.n() {
        for v in g.neighbors(u).filter(|&v| v > u) {
            sum += and_count(g.row(u), g.row(v)) as u64;
        }
    }
    sum / 3
}

/// Largest codegree over edges; 0 when the graph has no triangle.
pub fn book_number(g: &Graph) -> usize {
    if g.words() == 1 {
        return book_number_rows(&rows64(g));
    }
    let mut best = 0;
    for u in 0..g.n() {
        for v in g.neighbors(u).filter(|&v| v > u) {
            best = best.max(and_count(g.row(u), g.row(v)));
        }
    }
    best
}

pub fn k4_count(g: &Graph) -> u64 {
    let mut sum = 0u64;
    let mut common = vec![0u64; g.words()];
    for u in 0..g.n() {
        for v in g.neighbors(u).filter(|&v| v > u) {
            for (c, (a, b)) in common.iter_mut().zip(g.row(u).iter().zip(g.row(v))) {
                *c = a & b;
            }
            // edges xy inside N(u,v) with v < x < y
            for x in iter_bits(&common).filter(|&x| x > v) {
                sum += g
                    .row(x)
                    .iter()
                    .zip(&common)
                    .enumerate()
                    .map(|(i, (r, c))| (r & c & above(x, i)).count_ones() as u64)
                    .sum::<u64>();
            }
        }
    }
    sum
}

/// Mask of bit positions strictly above `x` within word `i`.
#[inline]
fn above(x: usize, i: usize) -> u64 {
    let lo = i * 64;
    if x < lo {
        u64::MAX
    } else if x >= lo + 63 {
        0
    } else {
        !((2u64 << (x - lo)) - 1)
    }
}

/// Number of (triangle, vertex) pairs where the vertex is adjacent to no
/// corner of the triangle, i.e. induced copies of `K_3 + K_1`.
pub fn k4_iso3_count(g: &Graph) -> u64 {
    let n = g.n();
    let mut sum = 0u64;
    for (x, y, z) in triangles(g) {
        let covered: usize = g
            .row(x)
            .iter()
            .zip(g.row(y))
            .zip(g.row(z))
            .map(|((a, b), c)| (a | b | c).count_ones() as usize)
            .sum();
        // the union already contains x, y and z
        sum += (n - covered) as u64;
    }
    sum
}

/// All triangles `(x, y, z)` with `x < y < z`.
pub fn triangles(g: &Graph) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    let mut common = vec![0u64; g.words()];
    for x in 0..g.n() {
        for y in g.neighbors(x).filter(|&y| y > x) {
            for (c, (a, b)) in common.iter_mut().zip(g.row(x).iter().zip(g.row(y))) {
                *c = a & b;
            }
            out.extend(iter_bits(&common).filter(|&z| z > y).map(|z| (x, y, z)));
        }
    }
    out
}

pub fn degree_sq_sum(g: &Graph) -> u64 {
    (0..g.n()).map(|v| (g.degree(v) as u64).pow(2)).sum()
}

/// Every invariant used by the inequality checks, in one record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantReport {
    pub n: usize,
    pub e: usize,
    pub t: u64,
    pub b: usize,
    pub k4: u64,
    pub k4_iso3: u64,
    pub degree_sq_sum: u64,
    /// Sorted nonincreasing.
    pub degrees: Vec<usize>,
}

pub fn invariant_report(g: &Graph) -> InvariantReport {
    let mut degrees = g.degrees();
    degrees.sort_unstable_by(|a, b| b.cmp(a));
    InvariantReport {
        n: g.n(),
        e: edge_count(g),
        t: triangle_count(g),
        b: book_number(g),
        k4: k4_count(g),
        k4_iso3: k4_iso3_count(g),
        degree_sq_sum: degree_sq_sum(g),
        degrees,
    }
}

/// Both sides of the Bollobás–Nikiforov inequality
/// `(6t − Σd² + n·e)·b ≥ n·t + 8·k4 + 2·k4_iso3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BnInequality {
    pub lhs: i64,
    pub rhs: i64,
    pub holds: bool,
}

pub fn bn_inequality(g: &Graph) -> BnInequality {
    bn_from_report(&invariant_report(g))
}

pub fn bn_from_report(r: &InvariantReport) -> BnInequality {
    let n = r.n as i64;
    let t = r.t as i64;
    let lhs = (6 * t - r.degree_sq_sum as i64 + n * r.e as i64) * r.b as i64;
    let rhs = n * t + 8 * r.k4 as i64 + 2 * r.k4_iso3 as i64;
    BnInequality {
        lhs,
        rhs,
        holds: lhs >= rhs,
    }
}

// ----------------------------------------------------------------------------
// Single-word kernels, shared with the exhaustive scan
// ----------------------------------------------------------------------------

/// Bits strictly above position `u` of a single word.
#[inline]
fn above_bit(u: usize) -> u64 {
    u64::MAX.checked_shl(u as u32 + 1).unwrap_or(0)
}

fn rows64(g: &Graph) -> Vec<u64> {
    (0..g.n()).map(|v| g.row64(v)).collect()
}

#[inline]
pub(crate) fn triangle_count_rows(rows: &[u64]) -> u64 {
    let mut sum = 0u64;
    for (u, &ru) in rows.iter().enumerate() {
        let mut m = ru & above_bit(u);
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            sum += (ru & rows[v]).count_ones() as u64;
        }
    }
    sum / 3
}

#[inline]
pub(crate) fn book_number_rows(rows: &[u64]) -> usize {
    let mut best = 0;
    for (u, &ru) in rows.iter().enumerate() {
        let mut m = ru & above_bit(u);
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            best = best.max((ru & rows[v]).count_ones() as usize);
        }
    }
    best
}

/// `(t, b)` in one pass.
#[inline]
pub(crate) fn triangles_and_book_rows(rows: &[u64]) -> (u64, usize) {
    let mut sum = 0u64;
    let mut best = 0u32;
    for (u, &ru) in rows.iter().enumerate() {
        let mut m = ru & above_bit(u);
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let c = (ru & rows[v]).count_ones();
            sum += c as u64;
            best = best.max(c);
        }
    }
    (sum / 3, best as usize)
}

// ----------------------------------------------------------------------------
// Rearrangement inequality helpers
// ----------------------------------------------------------------------------

fn dot<T>(a: &[T; 3], b: &[T; 3]) -> T
where
    T: Copy + Add<Output = T> + Mul<Output = T>,
{
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `back` sorted nonincreasing. Paired with a nonincreasing `front` this
/// maximises `front · back` over all orderings of `back`.
pub fn rearrange_desc<T: Copy + Ord>(front: &[T; 3], back: &[T; 3]) -> [T; 3] {
    debug_assert!(front[0] >= front[1] && front[1] >= front[2]);
    let mut out = *back;
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// The stated equality condition: `(f_i − f_j)(b_i − b_j) ≥ 0` for `i < j`.
pub fn rearrange_equality_holds<T>(front: &[T; 3], back: &[T; 3]) -> bool
where
    T: Copy + Ord + Default + Sub<Output = T> + Mul<Output = T>,
{
    let zero = T::default();
    (0..3).all(|i| (i + 1..3).all(|j| (front[i] - front[j]) * (back[i] - back[j]) >= zero))
}

/// Brute-force equality test: the sorted pairing and the given pairing have
/// the same dot product.
pub fn rearrange_equality_brute<T>(front: &[T; 3], back: &[T; 3]) -> bool
where
    T: Copy + Ord + Add<Output = T> + Mul<Output = T>,
{
    dot(front, &rearrange_desc(front, back)) == dot(front, back)
}

/// A triple pair on which the stated condition and brute force disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RearrangementFinding {
    pub front: [i64; 3],
    pub back: [i64; 3],
    pub condition: bool,
    pub brute_force: bool,
}

/// Compares the equality condition with brute force over every sorted
/// `front` and every `back` with entries in `0..=max`.
pub fn rearrangement_discrepancies(max: i64) -> (u64, Vec<RearrangementFinding>) {
    let mut checked = 0;
    let mut findings = Vec::new();
    for f0 in 0..=max {
        for f1 in 0..=f0 {
            for f2 in 0..=f1 {
                let front = [f0, f1, f2];
                for b0 in 0..=max {
                    for b1 in 0..=max {
                        for b2 in 0..=max {
                            let back = [b0, b1, b2];
                            checked += 1;
                            let condition = rearrange_equality_holds(&front, &back);
                            let brute_force = rearrange_equality_brute(&front, &back);
                            if condition != brute_force {
                                findings.push(RearrangementFinding {
                                    front,
                                    back,
                                    condition,
                                    brute_force,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    (checked, findings)
}
