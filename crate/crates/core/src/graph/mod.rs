//! Triple store: entity/relation vocabularies, adjacency, versioned deltas.
//!
//! Entities and relations are interned into dense `0..n` vocabularies in
//! first-seen order. Indices are never reassigned, even when deletions leave an
//! entity without edges, so embedding tables stay aligned across versions.

mod export;
mod graphml;
mod ntriples;
mod tsv;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use export::{to_dot, to_graphml, to_ntriples, to_tsv};
pub use graphml::parse_graphml;
pub use ntriples::parse_ntriples;
pub use tsv::parse_tsv;

/// Index into the entity vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityId(pub usize);

/// Index into the relation vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationId(pub usize);

impl EntityId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl RelationId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A fact resolved against a graph's vocabularies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

impl Triple {
    pub fn new(head: EntityId, relation: RelationId, tail: EntityId) -> Self {
        Triple { head, relation, tail }
    }
}

/// A fact as strings, before interning. Parsers produce these.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RawTriple {
    pub head: String,
    pub relation: String,
    pub tail: String,
}

impl RawTriple {
    pub fn new(head: impl Into<String>, relation: impl Into<String>, tail: impl Into<String>) -> Self {
        RawTriple { head: head.into(), relation: relation.into(), tail: tail.into() }
    }
}

impl fmt::Display for RawTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head, self.relation, self.tail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Out,
    In,
    Both,
}

/// Additions and deletions applied atomically by [`KnowledgeGraph::apply_delta`].
///
/// Deletions are applied before additions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDelta {
    pub additions: Vec<RawTriple>,
    pub deletions: Vec<RawTriple>,
}

impl GraphDelta {
    pub fn is_empty(&self) -> bool {
        self.additions.is_empty() && self.deletions.is_empty()
    }

    /// The delta that undoes this one.
    pub fn inverse(&self) -> GraphDelta {
        GraphDelta { additions: self.deletions.clone(), deletions: self.additions.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("empty term after canonicalization")]
    EmptyTerm,
    #[error("self-loop rejected for entity `{0}`")]
    SelfLoopRejected(String),
    #[error("relation `{0}` is not declared in the schema")]
    RelationNotInSchema(String),
    #[error("triple {0} is not present in the graph")]
    MissingTriple(RawTriple),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("parse error at line {line}, column {column}: {reason}")]
    Parse { line: usize, column: usize, reason: String },
}

impl GraphError {
    pub(crate) fn parse(line: usize, column: usize, reason: impl Into<String>) -> Self {
        GraphError::Parse { line, column, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, GraphError>;

/// Trim and collapse internal whitespace runs to a single space.
pub fn canonicalize(term: &str) -> String {
    let mut out = String::with_capacity(term.len());
    for (i, word) in term.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

#[derive(Debug, Clone, Default)]
struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    fn intern(&mut self, term: &str) -> usize {
        if let Some(&i) = self.index.get(term) {
            return i;
        }
        let i = self.terms.len();
        self.terms.push(term.to_owned());
        self.index.insert(term.to_owned(), i);
        i
    }

    fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }
}

#[derive(Debug, Clone)]
struct Slot {
    triple: Triple,
    count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GraphConfig {
    pub allow_self_loops: bool,
}

/// Directed labelled multigraph with dense vocabularies.
///
/// Duplicate triples share one slot with a multiplicity count. Slots whose count
/// drops to zero are kept (so handles stay valid) but are invisible to every
/// query and export.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    config: GraphConfig,
    schema: Option<BTreeSet<String>>,
    entities: Vocabulary,
    relations: Vocabulary,
    slots: Vec<Slot>,
    slot_index: HashMap<Triple, usize>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    live: usize,
    total: usize,
    version: u64,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_config(config: GraphConfig) -> Self {
        KnowledgeGraph { config, ..Self::default() }
    }

    /// Restrict relation labels to `relations`; later insertions of any other
    /// label fail with [`GraphError::RelationNotInSchema`].
    pub fn set_schema<I, S>(&mut self, relations: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.schema = Some(relations.into_iter().map(|r| canonicalize(r.as_ref())).collect());
    }

    pub fn config(&self) -> GraphConfig {
        self.config
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// Restores a persisted version counter.
    pub fn set_version(&mut self, version: u64) {
        self.version = version;
    }

    pub fn entity_count(&self) -> usize {
        self.entities.terms.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.terms.len()
    }

    /// Number of distinct triples currently present.
    pub fn triple_count(&self) -> usize {
        self.live
    }

    /// Number of triples counting multiplicity.
    pub fn total_count(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    pub fn entities(&self) -> &[String] {
        &self.entities.terms
    }

    pub fn relations(&self) -> &[String] {
        &self.relations.terms
    }

    pub fn entity_name(&self, id: EntityId) -> &str {
        &self.entities.terms[id.0]
    }

    pub fn relation_name(&self, id: RelationId) -> &str {
        &self.relations.terms[id.0]
    }

    pub fn entity_id(&self, name: &str) -> Option<EntityId> {
        self.entities.get(&canonicalize(name)).map(EntityId)
    }

    pub fn relation_id(&self, name: &str) -> Option<RelationId> {
        self.relations.get(&canonicalize(name)).map(RelationId)
    }

    /// Register an entity without edges. Returns its (possibly existing) id.
    pub fn intern_entity(&mut self, name: &str) -> Result<EntityId> {
        let name = canonicalize(name);
        if name.is_empty() {
            return Err(GraphError::EmptyTerm);
        }
        let id = self.entities.intern(&name);
        self.grow_adjacency();
        Ok(EntityId(id))
    }

    pub fn intern_relation(&mut self, name: &str) -> Result<RelationId> {
        let name = canonicalize(name);
        if name.is_empty() {
            return Err(GraphError::EmptyTerm);
        }
        self.check_schema(&name)?;
        Ok(RelationId(self.relations.intern(&name)))
    }

    fn check_schema(&self, relation: &str) -> Result<()> {
        match &self.schema {
            Some(allowed) if !allowed.contains(relation) => Err(GraphError::RelationNotInSchema(relation.to_owned())),
            _ => Ok(()),
        }
    }

    fn grow_adjacency(&mut self) {
        let n = self.entities.terms.len();
        self.out_adj.resize_with(n, Vec::new);
        self.in_adj.resize_with(n, Vec::new);
    }

    fn validate(&self, head: &str, relation: &str, tail: &str) -> Result<(String, String, String)> {
        let (h, r, t) = (canonicalize(head), canonicalize(relation), canonicalize(tail));
        if h.is_empty() || r.is_empty() || t.is_empty() {
            return Err(GraphError::EmptyTerm);
        }
        if h == t && !self.config.allow_self_loops {
            return Err(GraphError::SelfLoopRejected(h));
        }
        self.check_schema(&r)?;
        Ok((h, r, t))
    }

    /// Insert one occurrence of `(head, relation, tail)`; returns the triple's handle.
    pub fn add_triple(&mut self, head: &str, relation: &str, tail: &str) -> Result<Triple> {
        let (h, r, t) = self.validate(head, relation, tail)?;
        let triple = Triple::new(
            EntityId(self.entities.intern(&h)),
            RelationId(self.relations.intern(&r)),
            EntityId(self.entities.intern(&t)),
        );
        self.grow_adjacency();
        self.insert_resolved(triple);
        Ok(triple)
    }

    pub fn add_raw(&mut self, triple: &RawTriple) -> Result<Triple> {
        self.add_triple(&triple.head, &triple.relation, &triple.tail)
    }

    fn insert_resolved(&mut self, triple: Triple) {
        let slot = match self.slot_index.get(&triple) {
            Some(&s) => s,
            None => {
                let s = self.slots.len();
                self.slots.push(Slot { triple, count: 0 });
                self.slot_index.insert(triple, s);
                s
            }
        };
        if self.slots[slot].count == 0 {
            self.out_adj[triple.head.0].push(slot);
            self.in_adj[triple.tail.0].push(slot);
            self.live += 1;
        }
        self.slots[slot].count += 1;
        self.total += 1;
    }

    fn remove_resolved(&mut self, triple: Triple) {
        let slot = self.slot_index[&triple];
        self.slots[slot].count -= 1;
        self.total -= 1;
        if self.slots[slot].count == 0 {
            self.out_adj[triple.head.0].retain(|&s| s != slot);
            self.in_adj[triple.tail.0].retain(|&s| s != slot);
            self.live -= 1;
        }
    }

    /// Resolve string terms against the vocabularies without modifying them.
    pub fn resolve(&self, triple: &RawTriple) -> Option<Triple> {
        Some(Triple::new(
            self.entity_id(&triple.head)?,
            self.relation_id(&triple.relation)?,
            self.entity_id(&triple.tail)?,
        ))
    }

    pub fn multiplicity(&self, triple: Triple) -> usize {
        self.slot_index.get(&triple).map_or(0, |&s| self.slots[s].count)
    }

    pub fn contains(&self, triple: Triple) -> bool {
        self.multiplicity(triple) > 0
    }

    /// Distinct present triples in insertion order.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.slots.iter().filter(|s| s.count > 0).map(|s| s.triple)
    }

    /// Distinct present triples with their multiplicity.
    pub fn triples_with_counts(&self) -> impl Iterator<Item = (Triple, usize)> + '_ {
        self.slots.iter().filter(|s| s.count > 0).map(|s| (s.triple, s.count))
    }

    /// Present triples, each repeated by its multiplicity.
    pub fn triple_multiset(&self) -> impl Iterator<Item = Triple> + '_ {
        self.triples_with_counts().flat_map(|(t, c)| std::iter::repeat_n(t, c))
    }

    pub fn raw(&self, triple: Triple) -> RawTriple {
        RawTriple::new(
            self.entity_name(triple.head),
            self.relation_name(triple.relation),
            self.entity_name(triple.tail),
        )
    }

    /// Out-degree counting multiplicity.
    pub fn out_degree(&self, entity: EntityId) -> usize {
        self.out_adj[entity.0].iter().map(|&s| self.slots[s].count).sum()
    }

    /// In-degree counting multiplicity.
    pub fn in_degree(&self, entity: EntityId) -> usize {
        self.in_adj[entity.0].iter().map(|&s| self.slots[s].count).sum()
    }

    /// Distinct triples incident to `entity` in the given direction.
    pub fn incident(&self, entity: EntityId, direction: Direction) -> Vec<Triple> {
        let out = self.out_adj[entity.0].iter();
        let inc = self.in_adj[entity.0].iter();
        let slots: Vec<usize> = match direction {
            Direction::Out => out.copied().collect(),
            Direction::In => inc.copied().collect(),
            Direction::Both => out.chain(inc).copied().collect(),
        };
        slots.into_iter().map(|s| self.slots[s].triple).collect()
    }

    /// `(relation, other endpoint)` pairs; `Both` lists outgoing before incoming.
    pub fn neighbors(&self, entity: EntityId, direction: Direction) -> Result<Vec<(RelationId, EntityId)>> {
        if entity.0 >= self.entity_count() {
            return Err(GraphError::UnknownEntity(format!("#{}", entity.0)));
        }
        let out = self.out_adj[entity.0].iter().map(|&s| {
            let t = self.slots[s].triple;
            (t.relation, t.tail)
        });
        let inc = self.in_adj[entity.0].iter().map(|&s| {
            let t = self.slots[s].triple;
            (t.relation, t.head)
        });
        Ok(match direction {
            Direction::Out => out.collect(),
            Direction::In => inc.collect(),
            Direction::Both => out.chain(inc).collect(),
        })
    }

    /// As [`neighbors`](Self::neighbors), addressed by entity name.
    pub fn neighbors_of(&self, entity: &str, direction: Direction) -> Result<Vec<(RelationId, EntityId)>> {
        let id = self.entity_id(entity).ok_or_else(|| GraphError::UnknownEntity(entity.to_owned()))?;
        self.neighbors(id, direction)
    }

    /// Apply `delta` atomically and bump the version.
    ///
    /// On error nothing changes: not the triples, the vocabularies, nor the version.
    pub fn apply_delta(&mut self, delta: &GraphDelta) -> Result<u64> {
        // Validate everything before touching state.
        let mut pending: HashMap<Triple, usize> = HashMap::new();
        let mut removals = Vec::with_capacity(delta.deletions.len());
        for raw in &delta.deletions {
            let resolved = self.resolve(raw).filter(|t| {
                let wanted = pending.get(t).copied().unwrap_or(0) + 1;
                self.multiplicity(*t) >= wanted
            });
            match resolved {
                Some(t) => {
                    *pending.entry(t).or_default() += 1;
                    removals.push(t);
                }
                None => return Err(GraphError::MissingTriple(raw.clone())),
            }
        }
        let mut additions = Vec::with_capacity(delta.additions.len());
        for raw in &delta.additions {
            additions.push(self.validate(&raw.head, &raw.relation, &raw.tail)?);
        }

        for t in removals {
            self.remove_resolved(t);
        }
        for (h, r, t) in additions {
            let triple = Triple::new(
                EntityId(self.entities.intern(&h)),
                RelationId(self.relations.intern(&r)),
                EntityId(self.entities.intern(&t)),
            );
            self.grow_adjacency();
            self.insert_resolved(triple);
        }
        self.version += 1;
        Ok(self.version)
    }

    /// Build a graph from string triples, in order.
    pub fn from_raw<'a, I>(triples: I, config: GraphConfig) -> Result<Self>
    where
        I: IntoIterator<Item = &'a RawTriple>,
    {
        let mut g = KnowledgeGraph::with_config(config);
        for t in triples {
            g.add_raw(t)?;
        }
        Ok(g)
    }

    /// String form of every present triple, repeated by multiplicity.
    pub fn raw_multiset(&self) -> Vec<RawTriple> {
        self.triple_multiset().map(|t| self.raw(t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<RawTriple>) -> Vec<RawTriple> {
        v.sort();
        v
    }

    #[test]
    fn first_insertion() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("john", "founded", "acme").unwrap();
        assert_eq!(g.entity_count(), 2);
        assert_eq!(g.relation_count(), 1);
        assert_eq!(g.triple_count(), 1);
    }

    #[test]
    fn duplicate_increments_multiplicity() {
        let mut g = KnowledgeGraph::new();
        let a = g.add_triple("john", "founded", "acme").unwrap();
        let b = g.add_triple(" john ", "founded", "acme").unwrap();
        assert_eq!(a, b);
        assert_eq!(g.triple_count(), 1);
        assert_eq!(g.multiplicity(a), 2);
        assert_eq!(g.total_count(), 2);
    }

    #[test]
    fn self_loops_and_blank_terms() {
        let mut g = KnowledgeGraph::new();
        assert_eq!(g.add_triple("a", "r", "a"), Err(GraphError::SelfLoopRejected("a".into())));
        assert_eq!(g.add_triple("a", "  ", "b"), Err(GraphError::EmptyTerm));
        let mut g = KnowledgeGraph::with_config(GraphConfig { allow_self_loops: true });
        assert!(g.add_triple("a", "r", "a").is_ok());
    }

    #[test]
    fn canonicalization_collapses_whitespace_only() {
        assert_eq!(canonicalize("  New \t York  "), "New York");
        let mut g = KnowledgeGraph::new();
        g.add_triple("New  York", "in", "USA").unwrap();
        assert_eq!(g.entity_id("new york"), None);
        assert!(g.entity_id(" New York").is_some());
    }

    #[test]
    fn schema_constrains_relations() {
        let mut g = KnowledgeGraph::new();
        g.set_schema(["livesIn"]);
        assert!(g.add_triple("a", "livesIn", "b").is_ok());
        assert_eq!(g.add_triple("a", "likes", "b"), Err(GraphError::RelationNotInSchema("likes".into())));
    }

    #[test]
    fn delta_on_empty_graph() {
        let mut g = KnowledgeGraph::new();
        let delta = GraphDelta { additions: vec![RawTriple::new("a", "r", "b")], deletions: vec![] };
        assert_eq!(g.apply_delta(&delta).unwrap(), 1);
        assert_eq!(g.triple_count(), 1);
    }

    #[test]
    fn missing_deletion_is_atomic() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("x", "r", "y").unwrap();
        let delta = GraphDelta {
            additions: vec![RawTriple::new("c", "r", "d")],
            deletions: vec![RawTriple::new("a", "r", "b")],
        };
        assert_eq!(g.apply_delta(&delta), Err(GraphError::MissingTriple(RawTriple::new("a", "r", "b"))));
        assert_eq!(g.version(), 0);
        assert_eq!(g.entity_count(), 2);
        assert_eq!(g.triple_count(), 1);
    }

    #[test]
    fn deleting_more_copies_than_present_fails() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("a", "r", "b").unwrap();
        let t = RawTriple::new("a", "r", "b");
        let delta = GraphDelta { additions: vec![], deletions: vec![t.clone(), t] };
        assert!(matches!(g.apply_delta(&delta), Err(GraphError::MissingTriple(_))));
        assert_eq!(g.total_count(), 1);
    }

    #[test]
    fn invalid_addition_is_atomic() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("a", "r", "b").unwrap();
        let delta = GraphDelta {
            additions: vec![RawTriple::new("c", "r", "d"), RawTriple::new("e", "r", "e")],
            deletions: vec![RawTriple::new("a", "r", "b")],
        };
        assert!(g.apply_delta(&delta).is_err());
        assert_eq!(g.triple_count(), 1);
        assert_eq!(g.entity_count(), 2);
    }

    #[test]
    fn delete_then_add_same_triple() {
        // Reference multiset: {(a,r,b)×1}; delete then add → {(a,r,b)×1}.
        let mut g = KnowledgeGraph::new();
        g.add_triple("a", "r", "b").unwrap();
        let t = RawTriple::new("a", "r", "b");
        let delta = GraphDelta { additions: vec![t.clone()], deletions: vec![t.clone()] };
        assert_eq!(g.apply_delta(&delta).unwrap(), 1);
        assert_eq!(g.raw_multiset(), vec![t]);
    }

    #[test]
    fn deleted_entities_keep_their_index() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("a", "r", "b").unwrap();
        g.add_triple("c", "r", "b").unwrap();
        let delta = GraphDelta { additions: vec![], deletions: vec![RawTriple::new("a", "r", "b")] };
        g.apply_delta(&delta).unwrap();
        assert_eq!(g.entity_id("a"), Some(EntityId(0)));
        assert_eq!(g.out_degree(EntityId(0)), 0);
        g.add_triple("d", "r", "a").unwrap();
        assert_eq!(g.entity_id("d"), Some(EntityId(3)));
    }

    #[test]
    fn neighbor_queries() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("a", "r", "b").unwrap();
        let r = g.relation_id("r").unwrap();
        let a = g.entity_id("a").unwrap();
        assert_eq!(g.neighbors_of("a", Direction::Out).unwrap(), vec![(r, g.entity_id("b").unwrap())]);
        assert_eq!(g.neighbors_of("b", Direction::Out).unwrap(), vec![]);
        assert_eq!(g.neighbors_of("b", Direction::Both).unwrap(), vec![(r, a)]);
        assert_eq!(g.neighbors_of("zzz", Direction::Both), Err(GraphError::UnknownEntity("zzz".into())));
    }

    #[test]
    fn neighbors_both_lists_out_then_in() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("x", "p", "a").unwrap();
        g.add_triple("a", "q", "y").unwrap();
        let names: Vec<_> = g
            .neighbors_of("a", Direction::Both)
            .unwrap()
            .into_iter()
            .map(|(r, e)| (g.relation_name(r).to_owned(), g.entity_name(e).to_owned()))
            .collect();
        assert_eq!(names, vec![("q".to_owned(), "y".to_owned()), ("p".to_owned(), "x".to_owned())]);
    }

    #[test]
    fn inverse_delta_restores_multiset() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("a", "r", "b").unwrap();
        g.add_triple("a", "r", "b").unwrap();
        g.add_triple("b", "s", "c").unwrap();
        let before = sorted(g.raw_multiset());
        let delta = GraphDelta {
            additions: vec![RawTriple::new("c", "t", "d"), RawTriple::new("a", "r", "b")],
            deletions: vec![RawTriple::new("b", "s", "c")],
        };
        g.apply_delta(&delta).unwrap();
        g.apply_delta(&delta.inverse()).unwrap();
        assert_eq!(sorted(g.raw_multiset()), before);
        assert_eq!(g.version(), 2);
    }
}
