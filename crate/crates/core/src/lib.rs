//! Knowledge-graph construction, embedding, clustering and dynamics.
//!
//! The crate is organised around a directed labelled multigraph
//! ([`graph::KnowledgeGraph`]) that every other module consumes:
//!
//! - [`extract`] turns dependency-parsed sentences and LLM triple lines into triples.
//! - [`walk`] learns DeepWalk / node2vec entity embeddings.
//! - [`transe`] learns TransE entity and relation embeddings.
//! - [`cluster`] groups entities (k-means, agglomerative, ExCut-style loop) and picks `k`.
//! - [`predict`] predicts relations and evaluates link prediction (MRR / MR / Hits@k).
//! - [`dynamic`] reconstructs embeddings locally after the graph changes.

pub mod cluster;
pub mod datasets;
pub mod dynamic;
pub mod embedding;
pub mod extract;
pub mod graph;
pub mod predict;
pub mod transe;
pub mod walk;

pub(crate) mod rng;

pub use embedding::EmbeddingTable;
pub use graph::{Direction, EntityId, GraphDelta, KnowledgeGraph, RawTriple, RelationId, Triple};
