//! Exact invariants, extremal constructions, a part-vector calculus and
//! search drivers for the problem of minimising triangles in dense graphs
//! with bounded book number.

pub mod blowup;
pub mod calculus;
pub mod error;
pub mod graph;
pub mod graph6;
pub mod invariants;
pub mod iso;
pub mod pattern;
pub mod rng;
pub mod search;
pub mod structure;

pub use blowup::{
    blowup_book_number, blowup_edges, blowup_triangles, enumerate_part_vectors,
    verify_conjecture_blowups, BlowupVerdict,
};
pub use calculus::{
    adjust_a2_to_a1, case1_transform, case2_transform, delta_identity_suite, equalize_a4_a5,
    extremal_vector, f_fn, h1_fn, h2_fn, parse_rational, s_fn, sort_back_triple, t_fn,
    AdjustmentTrace, CalculusParams, PartVector, Rational,
};
pub use error::{CalculusError, Graph6Error, GraphError, SearchError, StructureError};
pub use graph::{
    blowup, complete_bipartite, construct_s_bn, empty_graph, s_bn_sizes, set_edge, Graph, VertexSet,
};
pub use graph6::{parse_graph6, read_graph6_lines, write_graph6};
pub use invariants::{
    bn_inequality, book_number, codegree, edge_count, invariant_report, k4_count, k4_iso3_count,
    triangle_count, BnInequality, InvariantReport,
};
pub use iso::is_isomorphic_small;
pub use pattern::{prism, PatternGraph, PrismPattern};
pub use search::{
    anneal_min_triangles, conjecture_bound, exhaustive_scan, mubayi_bound, parse_checks,
    AnnealConfig, Check, ScanConfig, ScanReport, SearchReport,
};
pub use structure::{
    certificate_for, classify_exceptional, compute_r0, decompose_prism, evaluate_certificate,
    select_good_triangle, Certificate, DecompositionResult, ExceptionalSplit, StabilityParams,
};
