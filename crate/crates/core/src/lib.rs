//! Streaming maximum-weight k-matching.
//!
//! Two streaming matchers share one exact back end:
//!
//! * [`InsertMatcher`] keeps, for a handful of random vertex partitions, a
//!   reduced subgraph of at most `4k^2` edges and spends a fixed number of
//!   work units per arrival.
//! * [`DynamicMatcher`] supports deletions by keeping a grid of l0-samplers
//!   keyed by pairs of hashed vertex classes and by weight.
//!
//! Both answer with the best k-matching found in their sketch, computed by
//! [`max_weight_k_matching`].

pub mod dynamic;
pub mod error;
pub mod format;
pub mod graph;
pub mod hashing;
pub mod insert;
pub mod l0;
pub mod reducer;
pub mod select;
pub mod solver;

pub use dynamic::{default_delta, round_weight, DynamicAnswer, DynamicConfig, DynamicMatcher, DynamicStats};
pub use error::{Error, Result};
pub use format::{parse_stream, write_stream, StreamFile};
pub use graph::{
    beta_compare, edge_from_index, edge_index, edge_universe, materialize, real, validate_stream, BetaKey, Edge,
    LiveGraph, Matching, Mode, Op, RealWeight, Stream, StreamElement, StreamViolation, Vertex, ViolationKind, Weight,
};
pub use hashing::{HashParams, HashScheme, KWiseHash, UniversalHash, MERSENNE_61};
pub use insert::{hash_count, step_budget, InsertMatcher, InsertStats};
pub use l0::{L0Params, L0Sampler, OneSparseCell, Sample, Touch};
pub use reducer::{compact_subgraph, reduce, Emit, Reducer, VertexPartitionHash};
pub use solver::{brute_force_oracle, max_weight_k_matching, BRUTE_FORCE_LIMIT};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/streams.md")]
    mod streams {}
    #[doc = include_str!("../../../book/src/hashing.md")]
    mod hashing {}
    #[doc = include_str!("../../../book/src/reduction.md")]
    mod reduction {}
    #[doc = include_str!("../../../book/src/insert-only.md")]
    mod insert_only {}
    #[doc = include_str!("../../../book/src/l0.md")]
    mod l0 {}
    #[doc = include_str!("../../../book/src/dynamic.md")]
    mod dynamic {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    mod acceptance {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
