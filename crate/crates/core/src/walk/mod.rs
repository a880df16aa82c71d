//! DeepWalk / node2vec: random walks over the graph, then skip-gram with
//! negative sampling over the walk corpus.

mod skipgram;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingTable;
use crate::graph::{Direction, EntityId, KnowledgeGraph};
use crate::rng;

pub use skipgram::{sgns_gradients, sgns_objective, train_skipgram, SgnsGradients};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WalkError {
    #[error("no walks to train on")]
    EmptyCorpus,
    #[error("entity {0} has no neighbours")]
    DeadEnd(usize),
    #[error("walk references entity {entity} outside a vocabulary of {size}")]
    UnknownEntity { entity: usize, size: usize },
    #[error("invalid walk config: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Steps per walk; a walk holds at most `walk_length + 1` nodes.
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub window: usize,
    pub dim: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
    /// Traverse edges along their direction only.
    pub directed: bool,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walk_length: 40,
            walks_per_node: 10,
            window: 5,
            dim: 64,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            p: 1.0,
            q: 1.0,
            directed: false,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<(), WalkError> {
        let checks = [
            (self.walk_length >= 1, "walk_length must be >= 1"),
            (self.walks_per_node >= 1, "walks_per_node must be >= 1"),
            (self.window >= 1, "window must be >= 1"),
            (self.dim >= 1, "dim must be >= 1"),
            (self.negatives >= 1, "negatives must be >= 1"),
            (self.p > 0.0, "p must be > 0"),
            (self.q > 0.0, "q must be > 0"),
            (self.learning_rate > 0.0, "learning_rate must be > 0"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(WalkError::InvalidConfig(msg)),
            None => Ok(()),
        }
    }
}

/// Simple adjacency used for traversal: sorted, de-duplicated neighbour lists.
/// Relation labels and multiplicities are ignored.
#[derive(Debug, Clone)]
pub struct WalkGraph {
    adj: Vec<Vec<usize>>,
}

impl WalkGraph {
    pub fn new(graph: &KnowledgeGraph, directed: bool) -> Self {
        let dir = if directed { Direction::Out } else { Direction::Both };
        let adj = (0..graph.entity_count())
            .map(|e| {
                let mut ns: Vec<usize> =
                    graph.neighbors(EntityId(e), dir).expect("entity in range").into_iter().map(|(_, n)| n.0).collect();
                ns.sort_unstable();
                ns.dedup();
                ns
            })
            .collect();
        WalkGraph { adj }
    }

    pub fn from_adjacency(mut adj: Vec<Vec<usize>>) -> Self {
        for ns in &mut adj {
            ns.sort_unstable();
            ns.dedup();
        }
        WalkGraph { adj }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adj[node]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.adj[from].binary_search(&to).is_ok()
    }

    /// Second-order transition probabilities out of `current`, aligned with
    /// `neighbors(current)`.
    ///
    /// Unnormalised weights: `1/p` to return to `prev`, `1` to neighbours of
    /// `prev`, `1/q` otherwise; every weight is `1` when there is no `prev`.
    pub fn transition_distribution(
        &self,
        prev: Option<usize>,
        current: usize,
        p: f64,
        q: f64,
    ) -> Result<Vec<f64>, WalkError> {
        let ns = self.neighbors(current);
        if ns.is_empty() {
            return Err(WalkError::DeadEnd(current));
        }
        let weights: Vec<f64> = match prev {
            None => vec![1.0; ns.len()],
            Some(prev) => ns
                .iter()
                .map(|&x| {
                    if x == prev {
                        1.0 / p
                    } else if self.has_edge(prev, x) {
                        1.0
                    } else {
                        1.0 / q
                    }
                })
                .collect(),
        };
        let total: f64 = weights.iter().sum();
        Ok(weights.into_iter().map(|w| w / total).collect())
    }

    fn step<R: Rng>(&self, prev: Option<usize>, current: usize, p: f64, q: f64, rng: &mut R) -> Option<usize> {
        let ns = self.neighbors(current);
        if ns.is_empty() {
            return None;
        }
        if prev.is_none() || (p == 1.0 && q == 1.0) {
            return Some(ns[rng.random_range(0..ns.len())]);
        }
        let probs = self.transition_distribution(prev, current, p, q).ok()?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (&n, pr) in ns.iter().zip(&probs) {
            acc += pr;
            if u < acc {
                return Some(n);
            }
        }
        ns.last().copied()
    }

    /// One walk from `start`, stopping early at a dead end.
    pub fn walk<R: Rng>(&self, start: usize, length: usize, p: f64, q: f64, rng: &mut R) -> Vec<usize> {
        let mut walk = Vec::with_capacity(length + 1);
        walk.push(start);
        let mut prev = None;
        let mut current = start;
        for _ in 0..length {
            match self.step(prev, current, p, q, rng) {
                Some(next) => {
                    prev = Some(current);
                    current = next;
                    walk.push(next);
                }
                None => break,
            }
        }
        walk
    }

    /// `walks_per_node` walks from every node in index order. Walk `i` uses
    /// its own RNG stream, so the result does not depend on scheduling.
    pub fn generate_walks(&self, config: &WalkConfig) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let per = config.walks_per_node;
        (0..n * per)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng::stream(config.seed, i as u64);
                self.walk(i / per, config.walk_length, config.p, config.q, &mut rng)
            })
            .collect()
    }
}

pub fn transition_distribution(
    graph: &KnowledgeGraph,
    prev: Option<EntityId>,
    current: EntityId,
    p: f64,
    q: f64,
) -> Result<Vec<(EntityId, f64)>, WalkError> {
    let wg = WalkGraph::new(graph, false);
    let probs = wg.transition_distribution(prev.map(|e| e.0), current.0, p, q)?;
    Ok(wg.neighbors(current.0).iter().map(|&n| EntityId(n)).zip(probs).collect())
}

pub fn generate_walks(graph: &KnowledgeGraph, config: &WalkConfig) -> Vec<Vec<usize>> {
    WalkGraph::new(graph, config.directed).generate_walks(config)
}

/// node2vec: biased walks, then skip-gram. Zero-degree entities keep their
/// initial vectors.
pub fn node2vec(graph: &KnowledgeGraph, config: &WalkConfig) -> Result<EmbeddingTable, WalkError> {
    config.validate()?;
    if graph.entity_count() == 0 {
        return Err(WalkError::EmptyCorpus);
    }
    let walks = generate_walks(graph, config);
    train_skipgram(&walks, graph.entity_count(), config)
}

/// DeepWalk: node2vec with `p = q = 1`.
pub fn deepwalk(graph: &KnowledgeGraph, config: &WalkConfig) -> Result<EmbeddingTable, WalkError> {
    node2vec(graph, &WalkConfig { p: 1.0, q: 1.0, ..config.clone() })
}

/// One space-separated line of entity names per walk.
pub fn walks_to_text(walks: &[Vec<usize>], names: &[String]) -> String {
    let mut out = String::new();
    for w in walks {
        let line: Vec<&str> = w.iter().map(|&i| names[i].as_str()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(edges: &[(&str, &str)]) -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for (a, b) in edges {
            g.add_triple(a, "r", b).unwrap();
        }
        g
    }

    #[test]
    fn star_center_uniform() {
        let g = graph(&[("c", "x"), ("c", "y"), ("z", "c")]);
        let c = g.entity_id("c").unwrap();
        let d = transition_distribution(&g, None, c, 1.0, 1.0).unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.iter().all(|&(_, p)| p == 1.0 / 3.0));
    }

    #[test]
    fn path_with_return_bias() {
        // a–b–c at b, prev = a, p = 2: weights a: 1/2, c: 1/q = 1 → (1/3, 2/3)
        let g = graph(&[("a", "b"), ("b", "c")]);
        let (a, b, c) = (g.entity_id("a").unwrap(), g.entity_id("b").unwrap(), g.entity_id("c").unwrap());
        let d = transition_distribution(&g, Some(a), b, 2.0, 1.0).unwrap();
        let get = |e| d.iter().find(|(x, _)| *x == e).unwrap().1;
        assert!((get(a) - 1.0 / 3.0).abs() < 1e-15);
        assert!((get(c) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn distance_one_weight() {
        // triangle a,b,c plus leaf d on b: at b from a, c is adjacent to a (weight 1), d is not (1/q)
        let wg = WalkGraph::from_adjacency(vec![vec![1, 2], vec![0, 2, 3], vec![0, 1], vec![1]]);
        let d = wg.transition_distribution(Some(0), 1, 4.0, 0.5).unwrap();
        // neighbours of b sorted: [a, c, d] → weights [0.25, 1, 2]
        let total = 3.25;
        assert_eq!(d, vec![0.25 / total, 1.0 / total, 2.0 / total]);
    }

    #[test]
    fn dead_end_signal() {
        let mut g = KnowledgeGraph::new();
        let a = g.intern_entity("lonely").unwrap();
        assert_eq!(transition_distribution(&g, None, a, 1.0, 1.0), Err(WalkError::DeadEnd(0)));
    }

    #[test]
    fn isolated_node_walk() {
        let mut g = KnowledgeGraph::new();
        g.intern_entity("lonely").unwrap();
        let walks = generate_walks(&g, &WalkConfig { walk_length: 5, walks_per_node: 2, ..Default::default() });
        assert_eq!(walks, vec![vec![0], vec![0]]);
    }

    #[test]
    fn two_node_path_alternates() {
        let g = graph(&[("a", "b")]);
        let walks = generate_walks(&g, &WalkConfig { walk_length: 3, walks_per_node: 4, ..Default::default() });
        assert_eq!(walks.len(), 8);
        for w in &walks {
            assert_eq!(w.len(), 4);
            assert!(w.windows(2).all(|p| p[0] != p[1]));
        }
    }

    #[test]
    fn directed_walks_dead_end() {
        let g = graph(&[("a", "b")]);
        let cfg = WalkConfig { walk_length: 3, walks_per_node: 1, directed: true, ..Default::default() };
        assert_eq!(generate_walks(&g, &cfg), vec![vec![0, 1], vec![1]]);
    }

    #[test]
    fn walks_are_seed_determined() {
        let g = graph(&[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("a", "c")]);
        let cfg = WalkConfig { walk_length: 10, walks_per_node: 3, p: 0.5, q: 2.0, seed: 11, ..Default::default() };
        assert_eq!(generate_walks(&g, &cfg), generate_walks(&g, &cfg));
        let other = WalkConfig { seed: 12, ..cfg.clone() };
        assert_ne!(generate_walks(&g, &cfg), generate_walks(&g, &other));
    }

    #[test]
    fn empty_graph_is_empty_corpus() {
        assert_eq!(deepwalk(&KnowledgeGraph::new(), &WalkConfig::default()), Err(WalkError::EmptyCorpus));
    }

    #[test]
    fn deepwalk_matches_unbiased_node2vec() {
        let g = graph(&[("a", "b"), ("b", "c"), ("c", "a"), ("c", "d")]);
        let cfg = WalkConfig { dim: 4, walk_length: 6, walks_per_node: 2, epochs: 2, seed: 3, ..Default::default() };
        let n2v = node2vec(&g, &WalkConfig { p: 1.0, q: 1.0, ..cfg.clone() }).unwrap();
        let dw = deepwalk(&g, &WalkConfig { p: 3.0, q: 0.2, ..cfg }).unwrap();
        assert_eq!(n2v, dw);
    }

    #[test]
    fn config_validation() {
        assert!(WalkConfig { q: 0.0, ..Default::default() }.validate().is_err());
        assert!(WalkConfig::default().validate().is_ok());
    }
}
