//! Isomorphism testing for graphs that tile into vertex-disjoint triangles.
//!
//! The pipeline arranges `G` into triangle blocks ([`rearrange`]), lists the
//! ordered triangles of `H` that could fill each block ([`candidates`]), and
//! grows consistent partial maps block by block ([`pipeline`]), optionally
//! compressing the survivors into a generating set ([`permgroup`]). An
//! exhaustive [`oracle`] and a randomized harness ([`fuzz`]) check it.

pub mod candidates;
pub mod cli;
pub mod fuzz;
pub mod graph;
pub mod oracle;
pub mod permgroup;
pub mod pipeline;
pub mod rearrange;

pub use graph::{parse_edge_list, Graph, VertexSet};
pub use permgroup::{GenSet, PartialMap, Permutation};
pub use pipeline::{decide, Mode, Options, Verdict, VerdictKind};
pub use rearrange::{rearrange, Arrangement, Block, TieBreak};
