//! ASMs, path corner sum matrices, gog/magog arrays, the TSSCPP dimer graph
//! and the observables connecting them.
//!
//! Interfaces use the 1-based indices of the underlying combinatorics;
//! dimer graph vertices are integer points `(x1, x2)`.

mod arrays;
mod enumerate;
mod graph;
mod matching;
mod matrices;
mod paths;

pub use arrays::{asm_to_gog, gog_to_asm, GogTrapezoid, MagogTrapezoid};
pub use enumerate::{
    count_asm, count_gog_trapezoids, count_magog_trapezoids, enumerate_asm,
    enumerate_gog_trapezoids, enumerate_pcsm, trapezoid_slices, DEFAULT_COUNT_CAP,
    DEFAULT_ENUM_CAP,
};
pub use graph::{dimer_graph, DimerGraph, EdgeKind, Vertex};
pub use matching::{enumerate_matchings, in_magog_slice, matching_to_magog, x_magog, DimerMatching};
pub use matrices::{asm_to_pcsm, pcsm_to_asm, AsmMatrix, PcsmMatrix};
pub use paths::{top_path, x_gog, TopPath};
