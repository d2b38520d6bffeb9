//! Exact calculus on six-part vectors: the prism edge and triangle forms
//! `S`, `T`, the certificate functions `F`, `H1`, `H2`, and the vector
//! moves (sorting, the a2-to-a1 adjustment, midpoint equalisation and the
//! two final transforms) together with their closed-form deltas.
//!
//! Entries are indexed 0-based in code; formulas in comments use the
//! 1-based names `a1..a6`.

use std::fmt;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::CalculusError;
use crate::graph::s_bn_sizes;
use crate::pattern::PRISM_EDGES_ONE_BASED;
use crate::rng::stream_rng;

pub type Rational = Ratio<i128>;

#[inline]
pub fn rat(n: i128) -> Rational {
    Rational::from_integer(n)
}

/// Greatest integer not exceeding `q`.
#[inline]
pub fn floor_rat(q: Rational) -> Rational {
    q.floor()
}

/// `⌊x²/4⌋`.
#[inline]
pub fn floor_quarter_square(x: Rational) -> Rational {
    floor_rat(x * x / rat(4))
}

/// Parses `"7"`, `"-7/2"` or a decimal such as `"0.55"` exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i128 = p.trim().parse().ok()?;
        let q: i128 = q.trim().parse().ok()?;
        return (q != 0).then(|| Rational::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty()
        || !(int.chars().chain(frac.chars())).all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits: i128 = format!("{int}{frac}").parse().ok()?;
    let scale = 10i128.checked_pow(frac.len() as u32)?;
    let q = Rational::new(digits, scale);
    Some(if neg { -q } else { q })
}

pub(crate) fn ser_rational<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(q)
}

// ----------------------------------------------------------------------------
// Part vectors
// ----------------------------------------------------------------------------

/// Six nonnegative rational part sizes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartVector([Rational; 6]);

impl PartVector {
    pub fn new(a: [Rational; 6]) -> Result<Self, CalculusError> {
        for (index, x) in a.iter().enumerate() {
            if *x < rat(0) {
                return Err(CalculusError::NegativeEntry {
                    index: index + 1,
                    value: x.to_string(),
                });
            }
        }
        Ok(PartVector(a))
    }

    pub fn from_ints(a: [i64; 6]) -> Result<Self, CalculusError> {
        PartVector::new(a.map(|x| rat(x as i128)))
    }

    pub fn from_sizes(a: &[usize; 6]) -> Self {
        PartVector(a.map(|x| rat(x as i128)))
    }

    #[inline]
    pub fn entries(&self) -> &[Rational; 6] {
        &self.0
    }

    pub fn norm1(&self) -> Rational {
        self.0.iter().sum()
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }

    /// The entries as integers, when they all are.
    pub fn to_integers(&self) -> Option<[i128; 6]> {
        self.is_integral().then(|| self.0.map(|x| x.to_integer()))
    }

    pub fn max_entry(&self) -> Rational {
        *self.0.iter().max().expect("six entries")
    }
}

impl std::ops::Index<usize> for PartVector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl fmt::Display for PartVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for PartVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Serialized as an array of strings such as `"7/2"`, keeping values exact.
impl Serialize for PartVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|x| x.to_string()))
    }
}

/// The book bound, the exceptional count and the norm that parametrise the
/// certificate functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CalculusParams {
    #[serde(serialize_with = "ser_rational")]
    pub b: Rational,
    pub r: u64,
    #[serde(serialize_with = "ser_rational")]
    pub n1: Rational,
}

impl CalculusParams {
    pub fn new(b: Rational, r: u64, n1: Rational) -> Result<Self, CalculusError> {
        if b <= rat(0) {
            return Err(CalculusError::Precondition(format!(
                "b must be positive, got {b}"
            )));
        }
        if n1 <= rat(0) {
            return Err(CalculusError::Precondition(format!(
                "n1 must be positive, got {n1}"
            )));
        }
        Ok(CalculusParams { b, r, n1 })
    }

    pub fn for_vector(a: &PartVector, b: Rational, r: u64) -> Result<Self, CalculusError> {
        CalculusParams::new(b, r, a.norm1())
    }
}

// ----------------------------------------------------------------------------
// S, T, F, H1, H2
// ----------------------------------------------------------------------------

/// Sum of `a_i a_j` over the prism edges.
pub fn s_fn(a: &PartVector) -> Rational {
    PRISM_EDGES_ONE_BASED
        .iter()
        .map(|&(i, j)| a[i - 1] * a[j - 1])
        .sum()
}

/// `a1 a2 a3 + a4 a5 a6`.
pub fn t_fn(a: &PartVector) -> Rational {
    a[0] * a[1] * a[2] + a[3] * a[4] * a[5]
}

/// `T − a1 (S − ⌊‖a‖²/4⌋) − b² (‖a‖ − 4b)`.
pub fn f_fn(a: &PartVector, b: Rational) -> Rational {
    let n1 = a.norm1();
    t_fn(a) - a[0] * (s_fn(a) - floor_quarter_square(n1)) - b * b * (n1 - rat(4) * b)
}

/// `S − ⌊‖a‖²/4⌋ − ‖a‖ r / 12`.
pub fn h1_fn(a: &PartVector, r: u64) -> Rational {
    let n1 = a.norm1();
    s_fn(a) - floor_quarter_square(n1) - n1 * rat(r as i128) / rat(12)
}

/// `S − a3 (a1 − b) − ⌊‖a‖²/4⌋ − ‖a‖ r / 12`.
pub fn h2_fn(a: &PartVector, b: Rational, r: u64) -> Rational {
    h1_fn(a, r) - a[2] * (a[0] - b)
}

/// `(b, b, ⌊(n−4b)/2⌋, b, b, ⌈(n−4b)/2⌉)`.
pub fn extremal_vector(n: usize, b: usize) -> Result<PartVector, CalculusError> {
    s_bn_sizes(n, b)
        .map(|s| PartVector::from_sizes(&s))
        .map_err(|e| CalculusError::Precondition(e.to_string()))
}

fn sorted_desc<const K: usize>(mut x: [Rational; K]) -> [Rational; K] {
    x.sort_unstable_by(|p, q| q.cmp(p));
    x
}

/// Sorts entries 4..6 nonincreasing, leaving 1..3 alone.
pub fn sort_back_triple(a: &PartVector) -> PartVector {
    let [a1, a2, a3, a4, a5, a6] = a.0;
    let [b4, b5, b6] = sorted_desc([a4, a5, a6]);
    PartVector([a1, a2, a3, b4, b5, b6])
}

// ----------------------------------------------------------------------------
// The a2-to-a1 adjustment
// ----------------------------------------------------------------------------

/// One vector on an adjustment trace with the values of `F` and `H2`
/// (taken with `r = 0`; `r` only shifts `H2` by a constant along a trace).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub label: &'static str,
    pub vector: PartVector,
    #[serde(serialize_with = "ser_rational")]
    pub f: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub h2: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjustOutcome {
    /// The terminal vector has `a2 = a1`.
    Reached,
    /// The second phase stopped with `a5 = a1` while `a2 < a1`. This is the
    /// branch the argument rules out by a separate inequality on `H2`.
    BackSaturated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdjustmentTrace {
    #[serde(serialize_with = "ser_rational")]
    pub b: Rational,
    /// The first entry is the input, labelled `start`.
    pub steps: Vec<TraceStep>,
    pub terminal: PartVector,
    pub outcome: AdjustOutcome,
}

impl AdjustmentTrace {
    /// Number of moves performed.
    pub fn moves(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn f_nonincreasing(&self) -> bool {
        self.steps.windows(2).all(|w| w[1].f <= w[0].f)
    }

    pub fn h2_nondecreasing(&self) -> bool {
        self.steps.windows(2).all(|w| w[1].h2 >= w[0].h2)
    }
}

fn check_adjust_input(a: &PartVector, b: Rational) -> Result<(), CalculusError> {
    let [a1, a2, a3, a4, a5, a6] = a.0;
    let fail = |m: &str| Err(CalculusError::Precondition(m.to_string()));
    if !a.is_integral() {
        return fail("adjustment needs integer entries");
    }
    if a1 != a.max_entry() {
        return fail("a1 must be the largest entry");
    }
    if !(a1 >= a2 && a2 >= a3) {
        return fail("need a1 >= a2 >= a3");
    }
    if !(a4 >= a5 && a5 >= a6) {
        return fail("need a4 >= a5 >= a6");
    }
    if a1 < b + rat(1) {
        return fail("need a1 >= b + 1");
    }
    Ok(())
}

/// Raises `a2` to `a1` by unit moves. While neither `a2` nor `a5` equals
/// `a1`, the move is `inc23` (`a2 += 1, a3 −= 1`) when `a5 − a6 ≥ a2 − a3`
/// and `inc56` (`a5 += 1, a6 −= 1`) otherwise. If `a5` reaches `a1` first,
/// entries 4 and 5 are swapped (`swap45`) and the same rule runs again.
///
/// Along the trace `F` never increases and `H2` never decreases. The number
/// of moves is at most `(a1−a2) + (a1−a5) + (a1−a4) + 1`.
pub fn adjust_a2_to_a1(a: &PartVector, b: Rational) -> Result<AdjustmentTrace, CalculusError> {
    check_adjust_input(a, b)?;
    let top = a[0];
    let cap = (rat(4) * top).to_integer().max(1) as usize;
    let mut cur = *a;
    let mut steps = vec![step("start", &cur, b)];

    run_phase(&mut cur, &mut steps, b, cap)?;
    if cur[1] != top {
        let mut x = cur.0;
        x.swap(3, 4);
        cur = PartVector(x);
        steps.push(step("swap45", &cur, b));
        run_phase(&mut cur, &mut steps, b, cap)?;
    }
    let outcome = if cur[1] == top {
        AdjustOutcome::Reached
    } else {
        AdjustOutcome::BackSaturated
    };
    Ok(AdjustmentTrace {
        b,
        steps,
        terminal: cur,
        outcome,
    })
}

fn step(label: &'static str, a: &PartVector, b: Rational) -> TraceStep {
    TraceStep {
        label,
        vector: *a,
        f: f_fn(a, b),
        h2: h2_fn(a, b, 0),
    }
}

fn run_phase(
    cur: &mut PartVector,
    steps: &mut Vec<TraceStep>,
    b: Rational,
    cap: usize,
) -> Result<(), CalculusError> {
    let top = cur[0];
    let one = rat(1);
    while cur[1] != top && cur[4] != top {
        if steps.len() > cap {
            return Err(CalculusError::StepBound(cap));
        }
        let mut x = cur.0;
        let label = if x[4] - x[5] >= x[1] - x[2] {
            x[1] += one;
            x[2] -= one;
            "inc23"
        } else {
            x[4] += one;
            x[5] -= one;
            "inc56"
        };
        *cur = PartVector::new(x)?;
        steps.push(step(label, cur, b));
    }
    Ok(())
}

// ----------------------------------------------------------------------------
// Equalisation and the final transforms
// ----------------------------------------------------------------------------

/// Replaces `a4` and `a5` by their midpoint. Requires `a1 = a2 = max` and
/// `a6 = min(a4, a5, a6)`.
pub fn equalize_a4_a5(a: &PartVector) -> Result<PartVector, CalculusError> {
    let [a1, a2, a3, a4, a5, a6] = a.0;
    if a1 != a2 || a1 != a.max_entry() {
        return Err(CalculusError::Precondition(
            "need a1 = a2 = largest entry".into(),
        ));
    }
    if a6 > a4 || a6 > a5 {
        return Err(CalculusError::Precondition(
            "a6 must be the smallest of a4, a5, a6".into(),
        ));
    }
    let mid = (a4 + a5) / rat(2);
    Ok(PartVector([a1, a2, a3, mid, mid, a6]))
}

/// `(a1, a2, a3 + a4 + a5 − 4b + 2a1, 2b − a1, 2b − a1, a6)`.
pub fn case1_transform(a: &PartVector, b: Rational) -> Result<PartVector, CalculusError> {
    let [a1, a2, a3, a4, a5, a6] = a.0;
    let side = rat(2) * b - a1;
    PartVector::new([
        a1,
        a2,
        a3 + a4 + a5 - rat(4) * b + rat(2) * a1,
        side,
        side,
        a6,
    ])
}

/// `(a1, a2, a3 + a4 + a5 − 2a1, a1, a1, a6)`.
pub fn case2_transform(a: &PartVector) -> Result<PartVector, CalculusError> {
    let [a1, a2, a3, a4, a5, a6] = a.0;
    PartVector::new([a1, a2, a3 + a4 + a5 - rat(2) * a1, a1, a1, a6])
}

/// Closed forms for the changes of `F` and `H2` under the moves above.
pub mod closed_form {
    use super::*;

    /// `F(a'') − F(a')` where `a'` has a1 maximal, sorted front and back
    /// triples, and `a'' = (a1, a1, ⌈(n1−4a1)/2⌉, a1, a1, ⌊(n1−4a1)/2⌋)`.
    pub fn replace4(a: &PartVector) -> Rational {
        let [a1, a2, a3, a4, a5, a6] = a.0;
        a1 * (a2 - a1) * (a5 - a6)
            - a4 * (a1 - a5) * (a1 - a6)
            - a1 * (a1 - a4) * (a1 - a6)
            - a1 * floor_quarter_square(a3 + a2 + a5 + a4 - rat(3) * a1 - a6)
    }

    /// The vector `a''` used by [`replace4`].
    pub fn replace4_target(a: &PartVector) -> PartVector {
        let a1 = a[0];
        let rest = a.norm1() - rat(4) * a1;
        let half = rest / rat(2);
        PartVector([a1, a1, half.ceil(), a1, a1, half.floor()])
    }

    /// `F(a'') = (b − a1)(4a1² + 4b² + 4a1 b − a1 n1 − b n1)`.
    pub fn balanced_f(a1: Rational, b: Rational, n1: Rational) -> Rational {
        (b - a1) * (rat(4) * a1 * a1 + rat(4) * b * b + rat(4) * a1 * b - a1 * n1 - b * n1)
    }

    /// `F` change of [`case1_transform`] when `a1 = a2`, `a4 = a5`:
    /// `(a1 − 2b + a4)(2b + a4 − a1)(a1 − a6)`.
    pub fn case1_f(a: &PartVector, b: Rational) -> Rational {
        let [a1, _, _, a4, _, a6] = a.0;
        (a1 - rat(2) * b + a4) * (rat(2) * b + a4 - a1) * (a1 - a6)
    }

    /// `H2` change of [`case2_transform`] when `a1 = a2`, `a4 = a5`:
    /// `(a1 − a4)(a1 − 2b + a4)`.
    pub fn case2_h2(a: &PartVector, b: Rational) -> Rational {
        let [a1, _, _, a4, _, _] = a.0;
        (a1 - a4) * (a1 - rat(2) * b + a4)
    }

    /// `F` change of [`equalize_a4_a5`]: `(a4 − a5)²(a6 − a1)/4`.
    pub fn equalize_f(a: &PartVector) -> Rational {
        let [a1, _, _, a4, a5, a6] = a.0;
        (a4 - a5) * (a4 - a5) * (a6 - a1) / rat(4)
    }

    /// `H2` change of [`equalize_a4_a5`]: `(a4 − a5)²/4`.
    pub fn equalize_h2(a: &PartVector) -> Rational {
        let [_, _, _, a4, a5, _] = a.0;
        (a4 - a5) * (a4 - a5) / rat(4)
    }

    /// `(ΔF, ΔH2)` of one adjustment move applied to `a`.
    pub fn adjust_move(label: &str, a: &PartVector, b: Rational) -> Option<(Rational, Rational)> {
        let [a1, a2, a3, a4, a5, a6] = a.0;
        let one = rat(1);
        match label {
            "inc23" => Some((a1 * (a6 - a5), a1 - a2 + a3 - b + a5 - a6 - one)),
            "inc56" => Some((
                a1 * (one - a2 + a3 + a5 - a6) + a4 * (-one - a5 + a6),
                a2 - a3 - a5 + a6 - one,
            )),
            "swap45" => Some((a1 * (a1 - a2) * (a4 - a5), (a1 - a2) * (a5 - a4))),
            _ => None,
        }
    }
}

// ----------------------------------------------------------------------------
// Randomised identity and monotonicity suites
// ----------------------------------------------------------------------------

/// A failed comparison between a direct evaluation and a closed form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub vector: PartVector,
    #[serde(serialize_with = "ser_rational")]
    pub b: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub direct: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub closed_form: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub trials: u64,
    pub mismatches: u64,
    pub first_mismatch: Option<Mismatch>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub seed: u64,
    pub trials: u64,
    pub checks: Vec<IdentityCheck>,
    pub all_hold: bool,
}

pub const IDENTITY_NAMES: [&str; 7] = [
    "replace4",
    "balanced_f",
    "case1_f",
    "case2_h2",
    "equalize_f",
    "equalize_h2",
    "adjust_moves",
];

/// Uniform rational in `[lo, lo + span]` with denominator dividing `den`.
fn random_rational<R: Rng>(rng: &mut R, lo: i128, span: i128, den: i128) -> Rational {
    lo_plus(rng, rat(lo), span, den)
}

fn lo_plus<R: Rng>(rng: &mut R, lo: Rational, span: i128, den: i128) -> Rational {
    lo + Rational::new(rng.random_range(0..=span * den), den)
}

/// A random integer vector accepted by [`adjust_a2_to_a1`], with a book
/// bound `b ≤ a1 − 1`. Entries lie in `[m, m + d]` with `m ≥ 2d`, so no
/// move can drive an entry negative.
pub fn random_adjust_input<R: Rng>(rng: &mut R) -> (PartVector, Rational) {
    let d = rng.random_range(1..=8i128);
    let m = rng.random_range(2 * d..=2 * d + 24);
    let mut x: [i128; 6] = std::array::from_fn(|_| rng.random_range(m..=m + d));
    let top = (0..6)
        .max_by_key(|&i| (x[i], std::cmp::Reverse(i)))
        .expect("six");
    x.swap(0, top);
    let front = sorted_desc([rat(x[0]), rat(x[1]), rat(x[2])]);
    let back = sorted_desc([rat(x[3]), rat(x[4]), rat(x[5])]);
    let a = PartVector([front[0], front[1], front[2], back[0], back[1], back[2]]);
    let b = (a[0] - rat(rng.random_range(1..=d + 2))).max(rat(1));
    (a, b)
}

fn check_one(name: &'static str, trial: u64, seed: u64) -> Option<Mismatch> {
    let mut rng = stream_rng(
        seed,
        trial * IDENTITY_NAMES.len() as u64
            + IDENTITY_NAMES
                .iter()
                .position(|&n| n == name)
                .expect("known identity") as u64,
    );
    let cmp = |vector: PartVector, b: Rational, direct: Rational, closed_form: Rational| {
        (direct != closed_form).then_some(Mismatch {
            vector,
            b,
            direct,
            closed_form,
        })
    };
    match name {
        "replace4" => {
            let (a, b) = random_adjust_input(&mut rng);
            let target = closed_form::replace4_target(&a);
            cmp(
                a,
                b,
                f_fn(&target, b) - f_fn(&a, b),
                closed_form::replace4(&a),
            )
        }
        "balanced_f" => {
            let a1 = rng.random_range(1..=60i128);
            let n1 = rng.random_range(4 * a1..=6 * a1 + 6);
            let b = rat(rng.random_range(1..=2 * a1));
            let v = closed_form::replace4_target(&PartVector([
                rat(a1),
                rat(0),
                rat(0),
                rat(0),
                rat(0),
                rat(n1 - a1),
            ]));
            cmp(
                v,
                b,
                f_fn(&v, b),
                closed_form::balanced_f(rat(a1), b, rat(n1)),
            )
        }
        "case1_f" | "case2_h2" => {
            let (a, b) = random_paired(&mut rng);
            if name == "case1_f" {
                let t = case1_transform(&a, b).expect("generator keeps entries nonnegative");
                cmp(a, b, f_fn(&t, b) - f_fn(&a, b), closed_form::case1_f(&a, b))
            } else {
                let t = case2_transform(&a).expect("generator keeps entries nonnegative");
                let r = rng.random_range(0..=20u64);
                cmp(
                    a,
                    b,
                    h2_fn(&t, b, r) - h2_fn(&a, b, r),
                    closed_form::case2_h2(&a, b),
                )
            }
        }
        "equalize_f" | "equalize_h2" => {
            let (a, b) = random_equalize_input(&mut rng);
            let e = equalize_a4_a5(&a).expect("generator meets the preconditions");
            if name == "equalize_f" {
                cmp(a, b, f_fn(&e, b) - f_fn(&a, b), closed_form::equalize_f(&a))
            } else {
                let r = rng.random_range(0..=20u64);
                cmp(
                    a,
                    b,
                    h2_fn(&e, b, r) - h2_fn(&a, b, r),
                    closed_form::equalize_h2(&a),
                )
            }
        }
        "adjust_moves" => {
            let (a, b) = random_adjust_input(&mut rng);
            let trace = adjust_a2_to_a1(&a, b).expect("generator meets the preconditions");
            for w in trace.steps.windows(2) {
                let (df, dh) = closed_form::adjust_move(w[1].label, &w[0].vector, b)
                    .expect("trace labels are adjustment moves");
                if df != w[1].f - w[0].f {
                    return cmp(w[0].vector, b, w[1].f - w[0].f, df);
                }
                if dh != w[1].h2 - w[0].h2 {
                    return cmp(w[0].vector, b, w[1].h2 - w[0].h2, dh);
                }
            }
            None
        }
        _ => unreachable!("unknown identity {name}"),
    }
}

/// Rational vector with `a1 = a2` and `a4 = a5` and a bound `b` for which
/// both final transforms stay nonnegative.
fn random_paired<R: Rng>(rng: &mut R) -> (PartVector, Rational) {
    let den = rng.random_range(1..=6i128);
    let d = rng.random_range(1..=8i128);
    let m = rng.random_range(2 * d..=2 * d + 24);
    let a1 = random_rational(rng, m, d, den);
    let a3 = random_rational(rng, m, d, den);
    let a4 = random_rational(rng, m, d, den);
    let a6 = random_rational(rng, m, d, den);
    // b within d of a1 keeps 2b − a1 and a3 + 2a4 − 4b + 2a1 nonnegative
    let b = lo_plus(rng, a1 - rat(d), d, den);
    (PartVector([a1, a1, a3, a4, a4, a6]), b)
}

/// Rational vector with `a1 = a2` largest and `a6` smallest in the back.
fn random_equalize_input<R: Rng>(rng: &mut R) -> (PartVector, Rational) {
    let den = rng.random_range(1..=6i128);
    let d = rng.random_range(1..=8i128);
    let m = rng.random_range(0..=30i128);
    let mut x: [Rational; 4] = std::array::from_fn(|_| random_rational(rng, m, d, den));
    x.sort_unstable_by(|p, q| q.cmp(p));
    let (a1, a6) = (x[0], x[3]);
    let (a4, a5) = if rng.random_bool(0.5) {
        (x[1], x[2])
    } else {
        (x[2], x[1])
    };
    let a3 = random_rational(rng, m, d, den).min(a1);
    let b = random_rational(rng, 1, m + d, den);
    (PartVector([a1, a1, a3, a4, a5, a6]), b)
}

/// Evaluates every closed form against direct evaluation on `trials`
/// seeded random inputs each. Mismatches are reported, not raised.
pub fn delta_identity_suite(seed: u64, trials: u64) -> IdentityReport {
    let checks: Vec<IdentityCheck> = IDENTITY_NAMES
        .iter()
        .map(|&name| {
            let found: Vec<(u64, Mismatch)> = (0..trials)
                .into_par_iter()
                .filter_map(|t| check_one(name, t, seed).map(|m| (t, m)))
                .collect();
            IdentityCheck {
                name,
                trials,
                mismatches: found.len() as u64,
                first_mismatch: found.into_iter().min_by_key(|(t, _)| *t).map(|(_, m)| m),
            }
        })
        .collect();
    let all_hold = checks.iter().all(|c| c.mismatches == 0);
    IdentityReport {
        seed,
        trials,
        checks,
        all_hold,
    }
}

/// Outcome of running the adjustment on many random inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonotonicityReport {
    pub seed: u64,
    pub traces: u64,
    pub total_moves: u64,
    pub max_moves: u64,
    pub reached: u64,
    pub back_saturated: u64,
    pub f_violations: u64,
    pub h2_violations: u64,
    pub step_bound_violations: u64,
    pub errors: u64,
}

/// Runs [`adjust_a2_to_a1`] on `traces` random admissible inputs and counts
/// every step where `F` rises or `H2` falls.
pub fn adjust_monotonicity_suite(seed: u64, traces: u64) -> MonotonicityReport {
    let per: Vec<[u64; 8]> = (0..traces)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t);
            let (a, b) = random_adjust_input(&mut rng);
            match adjust_a2_to_a1(&a, b) {
                Err(_) => [0, 0, 0, 0, 0, 0, 0, 1],
                Ok(tr) => {
                    let bound = (a[0] - a[1]) + (a[0] - a[4]) + (a[0] - a[3]) + rat(1);
                    [
                        tr.moves() as u64,
                        (tr.outcome == AdjustOutcome::Reached) as u64,
                        (tr.outcome == AdjustOutcome::BackSaturated) as u64,
                        tr.steps.windows(2).filter(|w| w[1].f > w[0].f).count() as u64,
                        tr.steps.windows(2).filter(|w| w[1].h2 < w[0].h2).count() as u64,
                        (rat(tr.moves() as i128) > bound) as u64,
                        tr.moves() as u64,
                        0,
                    ]
                }
            }
        })
        .collect();
    let sum = |k: usize| per.iter().map(|p| p[k]).sum::<u64>();
    MonotonicityReport {
        seed,
        traces,
        total_moves: sum(0),
        max_moves: per.iter().map(|p| p[6]).max().unwrap_or(0),
        reached: sum(1),
        back_saturated: sum(2),
        f_violations: sum(3),
        h2_violations: sum(4),
        step_bound_violations: sum(5),
        errors: sum(7),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn v(a: [i64; 6]) -> PartVector {
        PartVector::from_ints(a).unwrap()
    }

    fn half(p: i128, q: i128) -> Rational {
        Rational::new(p, q)
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("0.55"), Some(half(11, 20)));
        assert_eq!(parse_rational("-7/2"), Some(half(-7, 2)));
        assert_eq!(parse_rational("12"), Some(rat(12)));
        assert_eq!(parse_rational(".5"), Some(half(1, 2)));
        for bad in ["", ".", "1/0", "abc", "1.2.3", "--1"] {
            assert_eq!(parse_rational(bad), None, "{bad}");
        }
    }

    #[test]
    fn rejects_negative_entries() {
        assert!(matches!(
            PartVector::from_ints([1, 2, -1, 0, 0, 0]),
            Err(CalculusError::NegativeEntry { index: 3, .. })
        ));
        assert!(CalculusParams::new(rat(0), 0, rat(5)).is_err());
        assert!(CalculusParams::new(rat(2), 0, rat(0)).is_err());
    }

    #[test]
    fn function_examples() {
        let ones = v([1; 6]);
        assert_eq!(s_fn(&ones), rat(9));
        assert_eq!(t_fn(&ones), rat(2));
        assert_eq!(f_fn(&ones, rat(1)), rat(0));
        assert_eq!(h1_fn(&ones, 0), rat(0));
        assert_eq!(h1_fn(&ones, 12), rat(-6));
        assert_eq!(h2_fn(&ones, rat(1), 0), rat(0));
        let twos = v([2; 6]);
        assert_eq!(s_fn(&twos), rat(36));
        assert_eq!(t_fn(&twos), rat(16));
        assert_eq!(f_fn(&twos, rat(2)), rat(0));
        assert_eq!(t_fn(&v([3, 3, 0, 3, 3, 1])), rat(9));
    }

    #[test]
    #[allow(clippy::identity_op)]
    fn h2_matches_hand_expansion() {
        // (3,2,2,2,2,1), b = 2: S = 6+4+6+6+4+2+4+2+2 = 36, ‖a‖ = 12
        let a = v([3, 2, 2, 2, 2, 1]);
        let s = 3 * 2 + 2 * 2 + 3 * 2 + 3 * 2 + 2 * 2 + 2 * 1 + 2 * 2 + 2 * 1 + 2 * 1;
        assert_eq!(s_fn(&a), rat(s));
        let h2 = s - 2 * (3 - 2) - 144 / 4;
        assert_eq!(h2_fn(&a, rat(2), 0), rat(h2));
        let f = (3 * 2 * 2 + 2 * 2 * 1) - 3 * (s - 36) - 4 * (12 - 8);
        assert_eq!(f_fn(&a, rat(2)), rat(f));
    }

    #[test]
    fn s_on_extremal_shape() {
        for b in 1..8i128 {
            for x in 0..6i128 {
                for y in 0..6i128 {
                    let a = PartVector([rat(b), rat(b), rat(x), rat(b), rat(b), rat(y)]);
                    let n = 4 * b + x + y;
                    assert_eq!(s_fn(&a), rat(2 * b * n - 4 * b * b + x * y));
                }
            }
        }
    }

    #[test]
    fn extremal_vectors() {
        assert_eq!(extremal_vector(12, 2).unwrap(), v([2; 6]));
        assert_eq!(extremal_vector(13, 3).unwrap(), v([3, 3, 0, 3, 3, 1]));
        assert_eq!(extremal_vector(24, 4).unwrap(), v([4; 6]));
        assert!(extremal_vector(24, 3).is_err());
        assert!(extremal_vector(24, 7).is_err());
    }

    #[test]
    fn certificate_functions_vanish_on_extremal_vectors() {
        for n in 1..=200usize {
            for b in n.div_ceil(6)..=n / 4 {
                let a = extremal_vector(n, b).unwrap();
                let bb = rat(b as i128);
                assert_eq!(f_fn(&a, bb), rat(0), "n={n} b={b}");
                assert_eq!(h1_fn(&a, 0), rat(0));
                assert_eq!(h2_fn(&a, bb, 0), rat(0));
            }
        }
    }

    #[test]
    fn floor_consistency() {
        for m in 0..=200i128 {
            assert_eq!(floor_quarter_square(rat(m)), rat(m * m / 4));
        }
        assert_eq!(floor_rat(half(-1, 2)), rat(-1));
        assert_eq!(floor_rat(half(7, 2)), rat(3));
        // (7/2)² / 4 = 49/16
        assert_eq!(floor_quarter_square(half(7, 2)), rat(3));
    }

    #[test]
    fn sort_back_examples() {
        assert_eq!(
            sort_back_triple(&v([5, 4, 3, 3, 4, 5])),
            v([5, 4, 3, 5, 4, 3])
        );
        assert_eq!(
            sort_back_triple(&v([5, 4, 3, 5, 4, 3])),
            v([5, 4, 3, 5, 4, 3])
        );
    }

    #[test]
    fn sorting_does_not_raise_f() {
        let mut rng = stream_rng(17, 0);
        for _ in 0..10_000 {
            let front = sorted_desc([0; 3].map(|_| rat(rng.random_range(0..=20))));
            let back = [0; 3].map(|_| rat(rng.random_range(0..=20)));
            let a = PartVector([front[0], front[1], front[2], back[0], back[1], back[2]]);
            let s = sort_back_triple(&a);
            let b = rat(rng.random_range(1..=10));
            assert!(f_fn(&s, b) <= f_fn(&a, b), "{a}");
            assert!(h2_fn(&s, b, 0) >= h2_fn(&a, b, 0), "{a}");
            assert_eq!(s.norm1(), a.norm1());
        }
    }

    #[test]
    fn adjust_examples() {
        let tr = adjust_a2_to_a1(&v([5, 4, 3, 5, 4, 3]), rat(4)).unwrap();
        assert_eq!(tr.moves(), 1);
        assert_eq!(tr.steps[1].label, "inc23");
        assert_eq!(tr.terminal, v([5, 5, 2, 5, 4, 3]));
        assert_eq!(tr.outcome, AdjustOutcome::Reached);

        let tr = adjust_a2_to_a1(&v([5, 5, 3, 5, 4, 3]), rat(4)).unwrap();
        assert_eq!(tr.moves(), 0);
        assert_eq!(tr.terminal, v([5, 5, 3, 5, 4, 3]));
    }

    #[test]
    fn adjust_swap_branch() {
        // a5 − a6 is small, so a5 climbs to a1 before a2 does
        let a = v([10, 6, 6, 9, 9, 8]);
        let tr = adjust_a2_to_a1(&a, rat(8)).unwrap();
        let labels: Vec<_> = tr.steps.iter().map(|s| s.label).collect();
        assert!(labels.contains(&"swap45"), "{labels:?}");
        assert!(tr.f_nonincreasing() && tr.h2_nondecreasing());
        for w in tr.steps.windows(2) {
            assert_eq!(w[1].vector.norm1(), w[0].vector.norm1());
        }
    }

    #[test]
    fn adjust_rejects_bad_input() {
        let bad = [
            (v([4, 5, 3, 4, 4, 3]), 2),
            (v([5, 3, 4, 4, 4, 3]), 2),
            (v([5, 4, 3, 3, 4, 5]), 2),
            (v([5, 4, 3, 5, 4, 3]), 5),
        ];
        for (a, b) in bad {
            assert!(matches!(
                adjust_a2_to_a1(&a, rat(b)),
                Err(CalculusError::Precondition(_))
            ));
        }
        let frac = PartVector([half(11, 2), rat(4), rat(3), rat(4), rat(4), rat(3)]);
        assert!(adjust_a2_to_a1(&frac, rat(2)).is_err());
        // a move that would make an entry negative
        let thin = v([9, 2, 0, 2, 1, 0]);
        assert!(matches!(
            adjust_a2_to_a1(&thin, rat(1)),
            Err(CalculusError::NegativeEntry { .. })
        ));
    }

    #[test]
    fn equalize_examples() {
        assert_eq!(
            equalize_a4_a5(&v([5, 5, 2, 5, 3, 3])).unwrap(),
            v([5, 5, 2, 4, 4, 3])
        );
        let a = v([5, 5, 2, 4, 3, 3]);
        let e = equalize_a4_a5(&a).unwrap();
        assert_eq!(
            e,
            PartVector([rat(5), rat(5), rat(2), half(7, 2), half(7, 2), rat(3)])
        );
        assert!(!e.is_integral());
        let b = rat(4);
        assert_eq!(f_fn(&e, b) - f_fn(&a, b), closed_form::equalize_f(&a));
        assert_eq!(
            h2_fn(&e, b, 0) - h2_fn(&a, b, 0),
            closed_form::equalize_h2(&a)
        );
        assert_eq!(closed_form::equalize_h2(&a), half(1, 4));
        let same = v([5, 5, 2, 4, 4, 3]);
        assert_eq!(equalize_a4_a5(&same).unwrap(), same);
        assert_eq!(closed_form::equalize_f(&same), rat(0));
        assert!(equalize_a4_a5(&v([5, 4, 2, 4, 4, 3])).is_err());
        assert!(equalize_a4_a5(&v([5, 5, 2, 4, 2, 3])).is_err());
    }

    #[test]
    fn final_transforms() {
        let a = v([5, 5, 4, 4, 4, 4]);
        let t1 = case1_transform(&a, rat(4)).unwrap();
        assert_eq!(t1, v([5, 5, 6, 3, 3, 4]));
        assert_eq!(t1.norm1(), rat(26));
        assert_eq!(
            f_fn(&t1, rat(4)) - f_fn(&a, rat(4)),
            closed_form::case1_f(&a, rat(4))
        );
        let t2 = case2_transform(&a).unwrap();
        assert_eq!(t2, v([5, 5, 2, 5, 5, 4]));
        assert_eq!(
            h2_fn(&t2, rat(4), 0) - h2_fn(&a, rat(4), 0),
            closed_form::case2_h2(&a, rat(4))
        );
        // fixed points: a1 = b gives 2b − a1 = a4 when a4 = b
        let fixed = v([4, 4, 3, 4, 4, 3]);
        assert_eq!(case1_transform(&fixed, rat(4)).unwrap(), fixed);
        assert_eq!(case2_transform(&fixed).unwrap(), fixed);
        assert!(case2_transform(&v([9, 9, 0, 1, 1, 0])).is_err());
        assert!(case1_transform(&v([9, 9, 0, 1, 1, 0]), rat(1)).is_err());
    }

    #[test]
    fn named_closed_form_examples() {
        let a = v([5, 4, 3, 5, 4, 3]);
        let target = closed_form::replace4_target(&a);
        assert_eq!(target, v([5, 5, 2, 5, 5, 2]));
        assert_eq!(
            f_fn(&target, rat(4)) - f_fn(&a, rat(4)),
            closed_form::replace4(&a)
        );
        // with a1 = b the balanced vector has F = 0
        let bal = closed_form::replace4_target(&v([3, 3, 1, 3, 3, 2]));
        assert_eq!(f_fn(&bal, rat(3)), rat(0));
        assert_eq!(closed_form::balanced_f(rat(3), rat(3), rat(15)), rat(0));
    }

    #[test]
    fn identity_suite_small() {
        let r = delta_identity_suite(3, 2_000);
        assert_eq!(r.checks.len(), IDENTITY_NAMES.len());
        for c in &r.checks {
            assert_eq!(c.mismatches, 0, "{}: {:?}", c.name, c.first_mismatch);
        }
        assert!(r.all_hold);
        assert_eq!(r, delta_identity_suite(3, 2_000));
    }

    #[test]
    fn monotonicity_suite_small() {
        let r = adjust_monotonicity_suite(9, 2_000);
        assert_eq!(r.errors, 0);
        assert_eq!(
            (r.f_violations, r.h2_violations, r.step_bound_violations),
            (0, 0, 0)
        );
        assert_eq!(r.reached + r.back_saturated, 2_000);
    }

    #[test]
    fn serializes_exactly() {
        let a = PartVector([rat(5), half(7, 2), rat(0), rat(1), rat(1), rat(1)]);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            r#"["5","7/2","0","1","1","1"]"#
        );
        let tr = adjust_a2_to_a1(&v([5, 4, 3, 5, 4, 3]), rat(4)).unwrap();
        let json = serde_json::to_value(&tr).unwrap();
        assert_eq!(json["steps"][1]["label"], "inc23");
        assert_eq!(json["outcome"], "reached");
    }

    fn small_vector() -> impl Strategy<Value = PartVector> {
        proptest::array::uniform6(0i64..40).prop_map(|a| PartVector::from_ints(a).unwrap())
    }

    proptest! {
        #[test]
        fn moves_preserve_norm(seed in any::<u64>()) {
            let mut rng = stream_rng(seed, 0);
            let (a, b) = random_adjust_input(&mut rng);
            let tr = adjust_a2_to_a1(&a, b).unwrap();
            for s in &tr.steps {
                prop_assert_eq!(s.vector.norm1(), a.norm1());
            }
            prop_assert!(tr.f_nonincreasing());
            prop_assert!(tr.h2_nondecreasing());
            let top = a[0];
            prop_assert!(tr.terminal.max_entry() == top);
            if tr.outcome == AdjustOutcome::Reached {
                prop_assert_eq!(tr.terminal[1], top);
                let t = tr.terminal;
                prop_assert!(t[5] <= t[3] && t[5] <= t[4]);
            }
            let bound = (top - a[1]) + (top - a[4]) + (top - a[3]) + rat(1);
            prop_assert!(rat(tr.moves() as i128) <= bound);
        }

        #[test]
        fn sort_back_preserves_norm_and_front(a in small_vector()) {
            let s = sort_back_triple(&a);
            prop_assert_eq!(s.norm1(), a.norm1());
            prop_assert_eq!(&s.entries()[..3], &a.entries()[..3]);
            prop_assert!(s[3] >= s[4] && s[4] >= s[5]);
        }

        #[test]
        fn transforms_preserve_norm(a in small_vector(), b in 1i64..30) {
            let b = rat(b as i128);
            if let Ok(t) = case1_transform(&a, b) {
                prop_assert_eq!(t.norm1(), a.norm1());
            }
            if let Ok(t) = case2_transform(&a) {
                prop_assert_eq!(t.norm1(), a.norm1());
            }
        }

        #[test]
        fn equalize_deltas_on_grid(a6 in 0i64..12, dx in 0i64..8, dy in 0i64..8, up in 0i64..6, a3 in 0i64..12) {
            let (x, y) = (a6 + dx, a6 + dy);
            let a1 = x.max(y).max(a3) + up;
            let a = v([a1, a1, a3, x, y, a6]);
            let e = equalize_a4_a5(&a).unwrap();
            prop_assert_eq!(e.norm1(), a.norm1());
            let b = rat(3);
            prop_assert_eq!(f_fn(&e, b) - f_fn(&a, b), closed_form::equalize_f(&a));
            prop_assert!(closed_form::equalize_f(&a) <= rat(0));
            prop_assert_eq!(h2_fn(&e, b, 2) - h2_fn(&a, b, 2), closed_form::equalize_h2(&a));
        }
    }
}
