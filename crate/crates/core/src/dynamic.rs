//! Local embedding reconstruction after graph changes.
//!
//! A [`DynamicModel`] wraps a TransE model with a mask of which entity
//! vectors are trained ("known"). New or forgotten entities get vectors from
//! their embedded neighbourhood via two layers:
//!
//! - connectivity: mean of embedded neighbour vectors (either direction);
//! - translational: mean of `e_h + e_r` (node as tail) and `e_t − e_r`
//!   (node as head) over incident triples with an embedded other end.
//!
//! The composite layer averages both. Reconstruction reads one snapshot and
//! writes a fresh model, so new nodes never build on each other in a batch.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::embedding::{EmbeddingError, EmbeddingTable};
use crate::graph::{Direction, EntityId, GraphDelta, KnowledgeGraph};
use crate::rng;
use crate::transe::{TransEModel, TransEModelFile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicError {
    #[error("{found} embedded neighbours, need {required}")]
    InsufficientNeighbors { found: usize, required: usize },
    #[error("unknown entity {0}")]
    UnknownEntity(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Connectivity,
    Translational,
    #[default]
    Composite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Fallback {
    #[default]
    Zero,
    /// Uniform in `±6/√d`, L2-normalised, from stream `entity` of `seed`.
    Random { seed: u64 },
}

/// Which entities a delta triggers reconstruction for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    /// Entities without a trained vector (new or forgotten).
    #[default]
    New,
    /// Also existing entities whose incident edge set changed.
    Touched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconstructionConfig {
    pub layer: Layer,
    pub min_neighbors: usize,
    pub fallback: Fallback,
    pub scope: Scope,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig { layer: Layer::Composite, min_neighbors: 1, fallback: Fallback::Zero, scope: Scope::New }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerUsed {
    Connectivity,
    Translational,
    Composite,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeEntry {
    pub entity: String,
    pub layer_used: LayerUsed,
    pub neighbor_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChangeReport {
    pub graph_version: u64,
    pub changes: Vec<ChangeEntry>,
}

impl ChangeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// A TransE model that tracks which vectors are trained.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicModel {
    pub model: TransEModel,
    pub known_entities: Vec<bool>,
    pub known_relations: Vec<bool>,
    pub graph_version: u64,
}

impl DynamicModel {
    pub fn new(model: TransEModel, graph_version: u64) -> Self {
        let known_entities = vec![true; model.entity_count()];
        let known_relations = vec![true; model.relation_count()];
        DynamicModel { model, known_entities, known_relations, graph_version }
    }

    /// Align a model file to `graph`'s vocabularies; entities or relations
    /// missing from the file start unknown with zero vectors.
    pub fn from_file(file: &TransEModelFile, graph: &KnowledgeGraph) -> Result<Self, EmbeddingError> {
        let d = file.dim;
        let load = |map: &serde_json::Map<String, Value>,
                    names: &[String]|
         -> Result<(EmbeddingTable, Vec<bool>), EmbeddingError> {
            let mut table = EmbeddingTable::zeros(names.len(), d);
            let mut known = vec![false; names.len()];
            for (i, name) in names.iter().enumerate() {
                if map.contains_key(name) {
                    let one = EmbeddingTable::from_json_map(map, std::slice::from_ref(name), d)?;
                    table.set_row(i, one.row(0));
                    known[i] = true;
                }
            }
            Ok((table, known))
        };
        let (entities, known_entities) = load(&file.entities, graph.entities())?;
        let (relations, known_relations) = load(&file.relations, graph.relations())?;
        Ok(DynamicModel {
            model: TransEModel { entities, relations, config: file.config.clone() },
            known_entities,
            known_relations,
            graph_version: file.graph_version,
        })
    }

    /// Model file for the current state; unknown vectors are omitted.
    pub fn to_file(&self, graph: &KnowledgeGraph) -> TransEModelFile {
        let mut file = TransEModelFile::new(&self.model, graph.entities(), graph.relations(), self.graph_version);
        for (name, &known) in graph.entities().iter().zip(&self.known_entities) {
            if !known {
                file.entities.shift_remove(name);
            }
        }
        for (name, &known) in graph.relations().iter().zip(&self.known_relations) {
            if !known {
                file.relations.shift_remove(name);
            }
        }
        file
    }

    pub fn is_known(&self, e: EntityId) -> bool {
        self.known_entities.get(e.0).copied().unwrap_or(false)
    }

    /// Drop an entity's trained vector (its row becomes zero and unknown).
    pub fn forget(&mut self, e: EntityId) {
        if e.0 < self.known_entities.len() {
            self.known_entities[e.0] = false;
            self.model.entities.row_mut(e.0).fill(0.0);
        }
    }

    /// Grow the tables to the graph's vocabulary sizes with unknown rows.
    pub fn extend_to(&mut self, graph: &KnowledgeGraph) {
        let d = self.model.dim();
        while self.model.entity_count() < graph.entity_count() {
            self.model.entities.push_row(&vec![0.0; d]);
            self.known_entities.push(false);
        }
        while self.model.relation_count() < graph.relation_count() {
            self.model.relations.push_row(&vec![0.0; d]);
            self.known_relations.push(false);
        }
    }
}

fn mean(vectors: &[Vec<f64>], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d];
    for v in vectors {
        out.iter_mut().zip(v).for_each(|(o, x)| *o += x);
    }
    out.iter_mut().for_each(|o| *o /= vectors.len() as f64);
    out
}

/// Mean of the embedded neighbours of `node` (both directions, distinct).
pub fn navi_connectivity(
    graph: &KnowledgeGraph,
    embeddings: &EmbeddingTable,
    known: &[bool],
    node: EntityId,
    min_neighbors: usize,
) -> Result<(Vec<f64>, usize), DynamicError> {
    let nbrs = graph.neighbors(node, Direction::Both).map_err(|_| DynamicError::UnknownEntity(node.0))?;
    let distinct: BTreeSet<EntityId> =
        nbrs.into_iter().map(|(_, e)| e).filter(|&e| e != node && known.get(e.0).copied().unwrap_or(false)).collect();
    if distinct.is_empty() || distinct.len() < min_neighbors {
        return Err(DynamicError::InsufficientNeighbors { found: distinct.len(), required: min_neighbors.max(1) });
    }
    let vs: Vec<Vec<f64>> = distinct.iter().map(|e| embeddings.row(e.0).to_vec()).collect();
    Ok((mean(&vs, embeddings.dim()), vs.len()))
}

/// Mean of translational candidates over incident triples whose other end
/// and relation are embedded.
pub fn navi_translational(
    graph: &KnowledgeGraph,
    model: &DynamicModel,
    node: EntityId,
    min_neighbors: usize,
) -> Result<(Vec<f64>, usize), DynamicError> {
    if node.0 >= graph.entity_count() {
        return Err(DynamicError::UnknownEntity(node.0));
    }
    let known_rel = |r: usize| model.known_relations.get(r).copied().unwrap_or(false);
    let m = &model.model;
    let mut candidates = Vec::new();
    for t in graph.incident(node, Direction::Out) {
        if t.tail != node && model.is_known(t.tail) && known_rel(t.relation.0) {
            let (et, er) = (m.entities.row(t.tail.0), m.relations.row(t.relation.0));
            candidates.push(et.iter().zip(er).map(|(a, b)| a - b).collect());
        }
    }
    for t in graph.incident(node, Direction::In) {
        if t.head != node && model.is_known(t.head) && known_rel(t.relation.0) {
            let (eh, er) = (m.entities.row(t.head.0), m.relations.row(t.relation.0));
            candidates.push(eh.iter().zip(er).map(|(a, b)| a + b).collect());
        }
    }
    if candidates.is_empty() || candidates.len() < min_neighbors {
        return Err(DynamicError::InsufficientNeighbors { found: candidates.len(), required: min_neighbors.max(1) });
    }
    Ok((mean(&candidates, m.dim()), candidates.len()))
}

fn fallback_vector(fallback: Fallback, node: EntityId, d: usize) -> Vec<f64> {
    match fallback {
        Fallback::Zero => vec![0.0; d],
        Fallback::Random { seed } => {
            let mut r = rng::stream(seed, node.0 as u64);
            let bound = 6.0 / (d as f64).sqrt();
            let mut v: Vec<f64> = (0..d).map(|_| r.random_range(-bound..=bound)).collect();
            let n = crate::embedding::l2_norm(&v);
            if n > 0.0 {
                v.iter_mut().for_each(|x| *x /= n);
            }
            v
        }
    }
}

/// Reconstruct one node with the configured layer, falling back when no
/// layer is computable.
pub fn reconstruct_node(
    graph: &KnowledgeGraph,
    model: &DynamicModel,
    node: EntityId,
    config: &ReconstructionConfig,
) -> Result<(Vec<f64>, ChangeEntry), DynamicError> {
    let d = model.model.dim();
    let conn = || navi_connectivity(graph, &model.model.entities, &model.known_entities, node, config.min_neighbors);
    let trans = || navi_translational(graph, model, node, config.min_neighbors);
    let outcome = match config.layer {
        Layer::Connectivity => conn().map(|(v, n)| (v, LayerUsed::Connectivity, n)),
        Layer::Translational => trans().map(|(v, n)| (v, LayerUsed::Translational, n)),
        Layer::Composite => match (conn(), trans()) {
            (Ok((a, n)), Ok((b, _))) => {
                let v = a.iter().zip(&b).map(|(x, y)| (x + y) / 2.0).collect();
                Ok((v, LayerUsed::Composite, n))
            }
            (Ok((a, n)), Err(_)) => Ok((a, LayerUsed::Connectivity, n)),
            (Err(_), Ok((b, n))) => Ok((b, LayerUsed::Translational, n)),
            (Err(e), Err(_)) => Err(e),
        },
    };
    let name = graph.entity_name(node).to_owned();
    Ok(match outcome {
        Ok((v, layer_used, neighbor_count)) => {
            (v, ChangeEntry { entity: name, layer_used, neighbor_count, warning: None })
        }
        Err(DynamicError::InsufficientNeighbors { found, .. }) => {
            let warning = format!("no computable layer for `{name}`; used {:?} fallback", config.fallback);
            log::warn!("{warning}");
            let v = fallback_vector(config.fallback, node, d);
            (
                v,
                ChangeEntry {
                    entity: name,
                    layer_used: LayerUsed::Fallback,
                    neighbor_count: found,
                    warning: Some(warning),
                },
            )
        }
        Err(e) => return Err(e),
    })
}

/// Reconstruct `nodes` against one snapshot of `model`; returns the new model.
pub fn reconstruct_nodes(
    graph: &KnowledgeGraph,
    model: &DynamicModel,
    nodes: &[EntityId],
    config: &ReconstructionConfig,
) -> (DynamicModel, ChangeReport) {
    let mut snapshot = model.clone();
    snapshot.extend_to(graph);
    let results: Vec<_> = nodes.par_iter().map(|&n| (n, reconstruct_node(graph, &snapshot, n, config))).collect();
    let mut next = snapshot.clone();
    let mut report = ChangeReport { graph_version: graph.version(), changes: Vec::new() };
    for (node, result) in results {
        match result {
            Ok((v, entry)) => {
                next.model.entities.set_row(node.0, &v);
                next.known_entities[node.0] = true;
                report.changes.push(entry);
            }
            Err(e) => report.changes.push(ChangeEntry {
                entity: graph.entities().get(node.0).cloned().unwrap_or_else(|| node.0.to_string()),
                layer_used: LayerUsed::Fallback,
                neighbor_count: 0,
                warning: Some(e.to_string()),
            }),
        }
    }
    next.graph_version = graph.version();
    (next, report)
}

/// Entities a delta triggers reconstruction for, in delta order (deletions
/// first, then additions; heads before tails).
pub fn affected_entities(
    graph: &KnowledgeGraph,
    model: &DynamicModel,
    delta: &GraphDelta,
    scope: Scope,
) -> Vec<EntityId> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in delta.deletions.iter().chain(&delta.additions) {
        for name in [&t.head, &t.tail] {
            let Some(e) = graph.entity_id(name) else { continue };
            let wanted = !model.is_known(e) || scope == Scope::Touched;
            if wanted && seen.insert(e) {
                out.push(e);
            }
        }
    }
    // also pick up entities interned without edges
    for i in model.known_entities.len()..graph.entity_count() {
        if seen.insert(EntityId(i)) {
            out.push(EntityId(i));
        }
    }
    out
}

/// Reconstruct after `delta` has been applied to `graph`.
pub fn reconstruct_after_delta(
    graph: &KnowledgeGraph,
    model: &DynamicModel,
    delta: &GraphDelta,
    config: &ReconstructionConfig,
) -> (DynamicModel, ChangeReport) {
    let nodes = affected_entities(graph, model, delta, config.scope);
    reconstruct_nodes(graph, model, &nodes, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RawTriple;
    use crate::transe::TransEConfig;

    fn dyn_model(graph: &KnowledgeGraph, ents: &[(&str, [f64; 2])], rels: &[(&str, [f64; 2])]) -> DynamicModel {
        let mut entities = EmbeddingTable::zeros(graph.entity_count(), 2);
        let mut known = vec![false; graph.entity_count()];
        for (n, v) in ents {
            let id = graph.entity_id(n).unwrap();
            entities.set_row(id.0, v);
            known[id.0] = true;
        }
        let mut relations = EmbeddingTable::zeros(graph.relation_count(), 2);
        for (n, v) in rels {
            relations.set_row(graph.relation_id(n).unwrap().0, v);
        }
        DynamicModel {
            model: TransEModel { entities, relations, config: TransEConfig { dim: 2, ..Default::default() } },
            known_entities: known,
            known_relations: vec![true; graph.relation_count()],
            graph_version: 0,
        }
    }

    #[test]
    fn connectivity_means() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("x", "r", "a").unwrap();
        g.add_triple("b", "r", "x").unwrap();
        let m = dyn_model(&g, &[("a", [0.0, 0.0]), ("b", [2.0, 2.0])], &[]);
        let x = g.entity_id("x").unwrap();
        let (v, n) = navi_connectivity(&g, &m.model.entities, &m.known_entities, x, 1).unwrap();
        assert_eq!((v, n), (vec![1.0, 1.0], 2));
        assert!(navi_connectivity(&g, &m.model.entities, &m.known_entities, x, 3).is_err());
    }

    #[test]
    fn connectivity_identical_neighbours() {
        let mut g = KnowledgeGraph::new();
        for n in ["a", "b", "c"] {
            g.add_triple("x", "r", n).unwrap();
        }
        let m = dyn_model(&g, &[("a", [0.3, -1.0]), ("b", [0.3, -1.0]), ("c", [0.3, -1.0])], &[]);
        let (v, _) = navi_connectivity(&g, &m.model.entities, &m.known_entities, EntityId(0), 1).unwrap();
        assert_eq!(v, vec![0.3, -1.0]);
    }

    #[test]
    fn translational_candidates() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("h", "r", "x").unwrap();
        let m = dyn_model(&g, &[("h", [1.0, 1.0])], &[("r", [2.0, 0.0])]);
        assert_eq!(navi_translational(&g, &m, g.entity_id("x").unwrap(), 1).unwrap().0, vec![3.0, 1.0]);

        let mut g = KnowledgeGraph::new();
        g.add_triple("x", "r", "t").unwrap();
        let m = dyn_model(&g, &[("t", [3.0, 1.0])], &[("r", [2.0, 0.0])]);
        assert_eq!(navi_translational(&g, &m, g.entity_id("x").unwrap(), 1).unwrap().0, vec![1.0, 1.0]);

        let mut g = KnowledgeGraph::new();
        g.add_triple("h", "r", "x").unwrap();
        g.add_triple("x", "r", "t").unwrap();
        let m = dyn_model(&g, &[("h", [1.0, 1.0]), ("t", [3.0, 1.0])], &[("r", [2.0, 0.0])]);
        assert_eq!(navi_translational(&g, &m, g.entity_id("x").unwrap(), 1).unwrap(), (vec![2.0, 1.0], 2));
    }

    #[test]
    fn composite_averages_and_falls_back() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("h", "r", "x").unwrap();
        // connectivity: h = (0,0); translational: h + r = (2,2)
        let m = dyn_model(&g, &[("h", [0.0, 0.0])], &[("r", [2.0, 2.0])]);
        let x = g.entity_id("x").unwrap();
        let (v, e) = reconstruct_node(&g, &m, x, &ReconstructionConfig::default()).unwrap();
        assert_eq!((v, e.layer_used), (vec![1.0, 1.0], LayerUsed::Composite));

        g.intern_entity("lonely").unwrap();
        let mut m = m;
        m.extend_to(&g);
        let lonely = g.entity_id("lonely").unwrap();
        let cfg = ReconstructionConfig { fallback: Fallback::Random { seed: 4 }, ..Default::default() };
        let (a, e) = reconstruct_node(&g, &m, lonely, &cfg).unwrap();
        let (b, _) = reconstruct_node(&g, &m, lonely, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(e.layer_used, LayerUsed::Fallback);
        assert!(e.warning.is_some());
        assert!((crate::embedding::l2_norm(&a) - 1.0).abs() < 1e-12);
        let (z, _) = reconstruct_node(&g, &m, lonely, &ReconstructionConfig::default()).unwrap();
        assert_eq!(z, vec![0.0, 0.0]);
    }

    #[test]
    fn delta_with_new_entity_changes_one_vector() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("a", "r", "b").unwrap();
        g.add_triple("b", "r", "c").unwrap();
        let m = dyn_model(&g, &[("a", [0.0, 0.0]), ("b", [1.0, 0.0]), ("c", [2.0, 0.0])], &[("r", [1.0, 0.0])]);
        let delta = GraphDelta {
            additions: vec![RawTriple::new("c", "r", "n"), RawTriple::new("n", "r", "a")],
            deletions: vec![],
        };
        g.apply_delta(&delta).unwrap();
        let (next, report) = reconstruct_after_delta(&g, &m, &delta, &ReconstructionConfig::default());
        assert_eq!(report.changes.len(), 1);
        assert_eq!(report.changes[0].entity, "n");
        assert_eq!(report.changes[0].neighbor_count, 2);
        for i in 0..3 {
            assert_eq!(next.model.entities.row(i), m.model.entities.row(i));
        }
        // connectivity (1, 0); translational mean of c+r=(3,0), a−r=(−1,0) = (1, 0)
        assert_eq!(next.model.entities.row(3), &[1.0, 0.0]);
        assert_eq!(next.graph_version, g.version());
    }

    #[test]
    fn empty_delta_is_identity() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("a", "r", "b").unwrap();
        let m = dyn_model(&g, &[("a", [0.0, 0.0]), ("b", [1.0, 0.0])], &[("r", [1.0, 0.0])]);
        let (next, report) = reconstruct_after_delta(&g, &m, &GraphDelta::default(), &ReconstructionConfig::default());
        assert!(report.changes.is_empty());
        assert_eq!(next.model, m.model);
    }

    #[test]
    fn touched_scope_includes_neighbours() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("a", "r", "b").unwrap();
        let m = dyn_model(&g, &[("a", [0.0, 0.0]), ("b", [1.0, 0.0])], &[("r", [1.0, 0.0])]);
        let delta = GraphDelta { additions: vec![RawTriple::new("b", "r", "n")], deletions: vec![] };
        g.apply_delta(&delta).unwrap();
        let cfg = ReconstructionConfig { scope: Scope::Touched, ..Default::default() };
        let (_, report) = reconstruct_after_delta(&g, &m, &delta, &cfg);
        let names: Vec<&str> = report.changes.iter().map(|c| c.entity.as_str()).collect();
        assert_eq!(names, vec!["b", "n"]);
    }

    #[test]
    fn file_roundtrip_marks_missing_unknown() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("a", "r", "b").unwrap();
        let mut m = dyn_model(&g, &[("a", [0.5, 0.0]), ("b", [1.0, 0.0])], &[("r", [1.0, 0.0])]);
        m.forget(g.entity_id("b").unwrap());
        let file = m.to_file(&g);
        assert!(!file.entities.contains_key("b"));
        g.add_triple("b", "r", "c").unwrap();
        let back = DynamicModel::from_file(&file, &g).unwrap();
        assert_eq!(back.known_entities, vec![true, false, false]);
        assert_eq!(back.model.entities.row(0), &[0.5, 0.0]);
    }
}
