//! Explainable clustering loop: cluster the embeddings, mine per-cluster
//! rules from the graph, reassign entities by the rules they satisfy, and
//! pull each entity's embedding toward its assigned cluster.
//!
//! Rules are single atoms `(relation, object, direction)`: an entity matches
//! `(r, o, out)` when the graph holds `(entity, r, o)` and `(r, s, in)` when it
//! holds `(s, r, entity)`.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{kmeans_with, relabel, ClusterError, ClusterModel, KMeansConfig};
use crate::embedding::EmbeddingTable;
use crate::graph::{Direction, EntityId, KnowledgeGraph, RelationId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleDirection {
    Out,
    In,
}

type Atom = (RelationId, EntityId, RuleDirection);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterRule {
    pub relation: RelationId,
    pub object: EntityId,
    pub direction: RuleDirection,
    /// Fraction of cluster members matching the rule.
    pub support: f64,
    /// Fraction of matching entities that are in the cluster.
    pub exclusivity: f64,
    /// Harmonic mean of support and exclusivity.
    pub f1: f64,
}

impl ClusterRule {
    fn atom(&self) -> Atom {
        (self.relation, self.object, self.direction)
    }

    /// `livesIn→CityA` for outgoing rules, `knows←bob` for incoming ones.
    pub fn label(&self, graph: &KnowledgeGraph) -> String {
        let arrow = match self.direction {
            RuleDirection::Out => '→',
            RuleDirection::In => '←',
        };
        format!("{}{arrow}{}", graph.relation_name(self.relation), graph.entity_name(self.object))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcutConfig {
    pub k: usize,
    pub max_iters: usize,
    /// Rules kept per cluster.
    pub top_m: usize,
    /// Step toward the assigned centroid, in `[0, 1]`.
    pub eta: f64,
    pub seed: u64,
}

impl Default for ExcutConfig {
    fn default() -> Self {
        ExcutConfig { k: 2, max_iters: 10, top_m: 3, eta: 0.5, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcutResult {
    /// Clustering of `targets` (row `i` of the model is `targets[i]`).
    pub model: ClusterModel,
    pub rules: Vec<Vec<ClusterRule>>,
    pub targets: Vec<EntityId>,
    /// Adapted embeddings of `targets`.
    pub embeddings: EmbeddingTable,
    /// Entities moved by rule-based reassignment, per iteration.
    pub changes: Vec<usize>,
    pub iterations: usize,
}

impl ExcutResult {
    /// Label of each cluster's top rule (empty when a cluster has no rule).
    pub fn labels(&self, graph: &KnowledgeGraph) -> Vec<String> {
        self.rules.iter().map(|r| r.first().map(|r| r.label(graph)).unwrap_or_default()).collect()
    }

    pub fn rules_json(&self, graph: &KnowledgeGraph) -> Value {
        let clusters: Vec<Value> = self
            .rules
            .iter()
            .enumerate()
            .map(|(c, rules)| {
                let rules: Vec<Value> = rules
                    .iter()
                    .map(|r| {
                        json!({
                            "relation": graph.relation_name(r.relation),
                            "object": graph.entity_name(r.object),
                            "direction": r.direction,
                            "support": r.support,
                            "exclusivity": r.exclusivity,
                            "f1": r.f1,
                            "label": r.label(graph),
                        })
                    })
                    .collect();
                json!({ "cluster": c, "size": self.model.cluster_sizes()[c], "rules": rules })
            })
            .collect();
        Value::Array(clusters)
    }
}

fn atoms_of(graph: &KnowledgeGraph, e: EntityId) -> HashSet<Atom> {
    let out = graph.incident(e, Direction::Out).into_iter().map(|t| (t.relation, t.tail, RuleDirection::Out));
    let inc = graph.incident(e, Direction::In).into_iter().map(|t| (t.relation, t.head, RuleDirection::In));
    out.chain(inc).collect()
}

fn mine(atoms: &[HashSet<Atom>], assignments: &[usize], k: usize, top_m: usize) -> Vec<Vec<ClusterRule>> {
    let mut matchers: HashMap<Atom, usize> = HashMap::new();
    for set in atoms {
        for &a in set {
            *matchers.entry(a).or_insert(0) += 1;
        }
    }
    let mut sizes = vec![0usize; k];
    let mut inside: Vec<HashMap<Atom, usize>> = vec![HashMap::new(); k];
    for (set, &c) in atoms.iter().zip(assignments) {
        sizes[c] += 1;
        for &a in set {
            *inside[c].entry(a).or_insert(0) += 1;
        }
    }
    (0..k)
        .map(|c| {
            let mut rules: Vec<ClusterRule> = inside[c]
                .iter()
                .map(|(&(relation, object, direction), &hits)| {
                    let support = hits as f64 / sizes[c] as f64;
                    let exclusivity = hits as f64 / matchers[&(relation, object, direction)] as f64;
                    let f1 = 2.0 * support * exclusivity / (support + exclusivity);
                    ClusterRule { relation, object, direction, support, exclusivity, f1 }
                })
                .collect();
            rules.sort_by(|a, b| {
                b.f1.total_cmp(&a.f1).then(b.support.total_cmp(&a.support)).then(a.atom().cmp(&b.atom()))
            });
            rules.truncate(top_m);
            rules
        })
        .collect()
}

/// Top-`top_m` rules per cluster, ranked by F1 of support and exclusivity
/// (ties: higher support, then relation, object, direction).
pub fn mine_rules(
    graph: &KnowledgeGraph,
    targets: &[EntityId],
    assignments: &[usize],
    top_m: usize,
) -> Vec<Vec<ClusterRule>> {
    let atoms: Vec<HashSet<Atom>> = targets.iter().map(|&e| atoms_of(graph, e)).collect();
    let k = assignments.iter().max().map_or(0, |m| m + 1);
    mine(&atoms, assignments, k, top_m)
}

/// Move each entity to the cluster whose rules it matches best (max F1 among
/// matched rules); ties and no-match keep the current cluster.
fn reassign(atoms: &[HashSet<Atom>], assignments: &[usize], rules: &[Vec<ClusterRule>]) -> (Vec<usize>, usize) {
    let mut changes = 0;
    let next = atoms
        .iter()
        .zip(assignments)
        .map(|(set, &current)| {
            let score =
                |c: usize| rules[c].iter().filter(|r| set.contains(&r.atom())).map(|r| r.f1).fold(0.0, f64::max);
            let mut best = (current, score(current));
            for c in 0..rules.len() {
                let s = score(c);
                if s > best.1 {
                    best = (c, s);
                }
            }
            if best.0 != current {
                changes += 1;
            }
            best.0
        })
        .collect();
    (next, changes)
}

fn adapt(emb: &mut EmbeddingTable, assignments: &[usize], eta: f64) {
    let k = assignments.iter().max().map_or(0, |m| m + 1);
    let cents = super::centroids(emb, assignments, k);
    for (i, &c) in assignments.iter().enumerate() {
        emb.row_mut(i).iter_mut().zip(&cents[c]).for_each(|(x, m)| *x += eta * (m - *x));
    }
}

/// Run the loop on `targets` (all entities when `None`). `embeddings` rows are
/// aligned with the graph's entity ids.
pub fn excut_loop(
    graph: &KnowledgeGraph,
    embeddings: &EmbeddingTable,
    targets: Option<&[EntityId]>,
    config: &ExcutConfig,
) -> Result<ExcutResult, ClusterError> {
    if config.k < 2 {
        return Err(ClusterError::KTooSmall { k: config.k, min: 2 });
    }
    if !(0.0..=1.0).contains(&config.eta) {
        return Err(ClusterError::InvalidParameter("eta must lie in [0, 1]"));
    }
    if embeddings.rows() != graph.entity_count() {
        return Err(ClusterError::LengthMismatch { points: graph.entity_count(), assignments: embeddings.rows() });
    }
    let targets: Vec<EntityId> =
        targets.map(<[EntityId]>::to_vec).unwrap_or_else(|| (0..graph.entity_count()).map(EntityId).collect());
    let atoms: Vec<HashSet<Atom>> = targets.iter().map(|&e| atoms_of(graph, e)).collect();
    let mut emb = EmbeddingTable::zeros(0, embeddings.dim());
    for &e in &targets {
        emb.push_row(embeddings.row(e.0));
    }
    let cluster = |emb: &EmbeddingTable| {
        kmeans_with(emb, &KMeansConfig::new(config.k, config.seed)).map(|mut m| {
            m.assignments = relabel(&m.assignments);
            ClusterModel::from_assignments(emb, m.assignments).expect("aligned")
        })
    };

    let mut model = cluster(&emb)?;
    let mut rules = mine(&atoms, &model.assignments, model.k, config.top_m);
    let mut changes = Vec::new();
    let mut iterations = 0;
    while iterations < config.max_iters {
        iterations += 1;
        let (moved, n_changed) = reassign(&atoms, &model.assignments, &rules);
        changes.push(n_changed);
        log::debug!("excut iteration {iterations}: {n_changed} reassigned");
        adapt(&mut emb, &moved, config.eta);
        let next = cluster(&emb)?;
        let stable = n_changed == 0 && next.assignments == model.assignments;
        model = next;
        rules = mine(&atoms, &model.assignments, model.k, config.top_m);
        if stable {
            break;
        }
    }
    Ok(ExcutResult { model, rules, targets, embeddings: emb, changes, iterations })
}
