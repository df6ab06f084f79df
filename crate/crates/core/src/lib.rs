//! Synthetic clickstream generation with memory biased random walks.
//!
//! The pipeline learns two count matrices from a corpus of item sequences
//! ([`seqgraph`]), generates synthetic sequences from them ([`generator`]),
//! and scores the result for statistical fidelity ([`fidelity`]) and for
//! recommender utility on real users ([`recsys`]).

pub mod corpus;
pub mod error;
pub mod fidelity;
pub mod format;
pub mod generator;
pub mod manifest;
pub mod planted;
pub mod recsys;
pub mod rng;
pub mod seqgraph;

pub use corpus::{
    load_clickstreams, load_clickstreams_with_vocab, save_clickstreams, Clickstream, ClickstreamSet, ItemId,
    LengthDistribution, StartDistribution, Vocabulary,
};
pub use error::{Error, Result};
pub use generator::{generate_clickstream, generate_set, mbrw_kernel, mix_epsilon, MbrwConfig, MemoryDistribution};
pub use seqgraph::{build_cvs, build_ds, k_anonymity_filter, CountingMode, CvsMatrix, DsMatrix, SparseCountMatrix};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
