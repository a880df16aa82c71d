//! TransE: entities and relations in one space, a fact `(h, r, t)` scored by
//! `‖e_h + e_r − e_t‖` (L1 by default). Trained with the margin ranking loss
//! `max(0, γ + score(pos) − score(neg))` against head- or tail-corrupted
//! negatives.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::embedding::{EmbeddingError, EmbeddingTable};
use crate::graph::{EntityId, KnowledgeGraph, RelationId, Triple};
use crate::rng;

const CORRUPTION_RETRIES: usize = 100;

#[derive(Debug, Error)]
pub enum TransEError {
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("no training triples")]
    EmptyTrainingSet,
    #[error("need at least 2 entities, found {0}")]
    TooFewEntities(usize),
    #[error("no corruption absent from the graph after {0} retries")]
    CorruptionExhausted(usize),
    #[error("invalid config: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    L1,
    L2,
}

impl Norm {
    pub fn of(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
            Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    /// Subgradient of the norm at `v`; `sign(0) = 0` for L1 and the zero
    /// vector at the origin for L2.
    pub fn gradient(self, v: &[f64]) -> Vec<f64> {
        match self {
            Norm::L1 => v
                .iter()
                .map(|&x| {
                    if x > 0.0 {
                        1.0
                    } else if x < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
            Norm::L2 => {
                let n = self.of(v);
                if n == 0.0 {
                    vec![0.0; v.len()]
                } else {
                    v.iter().map(|x| x / n).collect()
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransEConfig {
    pub dim: usize,
    pub margin: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub norm: Norm,
    pub seed: u64,
    /// Resample corruptions until they are absent from the known triples.
    pub filter_corruptions: bool,
    /// Renormalise entity vectors to unit L2 norm every epoch.
    pub unit_entities: bool,
}

impl Default for TransEConfig {
    fn default() -> Self {
        TransEConfig {
            dim: 50,
            margin: 1.0,
            learning_rate: 0.01,
            epochs: 500,
            batch_size: 128,
            norm: Norm::L1,
            seed: 0,
            filter_corruptions: true,
            unit_entities: true,
        }
    }
}

impl TransEConfig {
    pub fn validate(&self) -> Result<(), TransEError> {
        if self.dim == 0 {
            return Err(TransEError::InvalidConfig("dim must be >= 1"));
        }
        if self.margin.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(TransEError::InvalidConfig("margin must be > 0"));
        }
        if self.batch_size == 0 {
            return Err(TransEError::InvalidConfig("batch_size must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransEModel {
    pub entities: EmbeddingTable,
    pub relations: EmbeddingTable,
    pub config: TransEConfig,
}

/// `‖h + r − t‖` under `norm`.
pub fn score_vectors(h: &[f64], r: &[f64], t: &[f64], norm: Norm) -> f64 {
    let diff: Vec<f64> = h.iter().zip(r).zip(t).map(|((h, r), t)| h + r - t).collect();
    norm.of(&diff)
}

pub fn margin_loss(pos_score: f64, neg_score: f64, margin: f64) -> f64 {
    (margin + pos_score - neg_score).max(0.0)
}

/// Vectors of one positive/negative pair sharing a relation.
#[derive(Debug, Clone, Copy)]
pub struct PairVectors<'a> {
    pub head: &'a [f64],
    pub relation: &'a [f64],
    pub tail: &'a [f64],
    pub neg_head: &'a [f64],
    pub neg_tail: &'a [f64],
}

impl PairVectors<'_> {
    pub fn loss(&self, margin: f64, norm: Norm) -> f64 {
        margin_loss(
            score_vectors(self.head, self.relation, self.tail, norm),
            score_vectors(self.neg_head, self.relation, self.neg_tail, norm),
            margin,
        )
    }

    /// Subgradient of [`loss`](Self::loss) with respect to each vector
    /// (treated as five independent arguments).
    pub fn gradients(&self, margin: f64, norm: Norm) -> PairGradients {
        let d = self.head.len();
        if self.loss(margin, norm) <= 0.0 {
            return PairGradients::zeros(d);
        }
        let diff = |h: &[f64], t: &[f64]| -> Vec<f64> {
            h.iter().zip(self.relation).zip(t).map(|((h, r), t)| h + r - t).collect()
        };
        let gp = norm.gradient(&diff(self.head, self.tail));
        let gn = norm.gradient(&diff(self.neg_head, self.neg_tail));
        PairGradients {
            head: gp.clone(),
            relation: gp.iter().zip(&gn).map(|(p, n)| p - n).collect(),
            tail: gp.iter().map(|x| -x).collect(),
            neg_head: gn.iter().map(|x| -x).collect(),
            neg_tail: gn.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairGradients {
    pub head: Vec<f64>,
    pub relation: Vec<f64>,
    pub tail: Vec<f64>,
    pub neg_head: Vec<f64>,
    pub neg_tail: Vec<f64>,
}

impl PairGradients {
    fn zeros(d: usize) -> Self {
        let z = vec![0.0; d];
        PairGradients { head: z.clone(), relation: z.clone(), tail: z.clone(), neg_head: z.clone(), neg_tail: z }
    }
}

impl TransEModel {
    pub fn dim(&self) -> usize {
        self.entities.dim()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.rows()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.rows()
    }

    fn check(&self, h: EntityId, r: RelationId, t: EntityId) -> Result<(), TransEError> {
        let n = self.entity_count();
        for e in [h, t] {
            if e.0 >= n {
                return Err(TransEError::IndexOutOfRange(format!("entity {} (of {n})", e.0)));
            }
        }
        if r.0 >= self.relation_count() {
            return Err(TransEError::IndexOutOfRange(format!("relation {} (of {})", r.0, self.relation_count())));
        }
        Ok(())
    }

    pub fn score(&self, h: EntityId, r: RelationId, t: EntityId) -> Result<f64, TransEError> {
        self.check(h, r, t)?;
        Ok(self.score_unchecked(h, r, t))
    }

    pub(crate) fn score_unchecked(&self, h: EntityId, r: RelationId, t: EntityId) -> f64 {
        score_vectors(self.entities.row(h.0), self.relations.row(r.0), self.entities.row(t.0), self.config.norm)
    }

    /// Random initialisation: uniform in `[−6/√d, 6/√d]`, relations normalised
    /// once, entities normalised (when `unit_entities`).
    pub fn init(entities: usize, relations: usize, config: &TransEConfig) -> Self {
        let d = config.dim;
        let bound = 6.0 / (d as f64).sqrt();
        let mut r = rng::stream(config.seed, 0);
        let mut ent = EmbeddingTable::uniform(entities, d, bound, &mut r);
        let mut rel = EmbeddingTable::uniform(relations, d, bound, &mut r);
        rel.normalize_rows();
        if config.unit_entities {
            ent.normalize_rows();
        }
        TransEModel { entities: ent, relations: rel, config: config.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Head,
    Tail,
}

/// Corrupts positives by swapping head or tail for a uniformly random entity.
#[derive(Debug, Clone)]
pub struct Corruptor<'a> {
    pub known: &'a HashSet<Triple>,
    pub entity_count: usize,
    pub reject_self_loops: bool,
    /// Require the corrupted triple to be absent from `known`.
    pub check_absence: bool,
}

impl Corruptor<'_> {
    pub fn corrupt<R: Rng>(&self, triple: Triple, rng: &mut R) -> Result<(Triple, Side), TransEError> {
        if self.entity_count < 2 {
            return Err(TransEError::TooFewEntities(self.entity_count));
        }
        for _ in 0..CORRUPTION_RETRIES {
            let side = if rng.random_bool(0.5) { Side::Head } else { Side::Tail };
            let e = EntityId(rng.random_range(0..self.entity_count));
            let c = match side {
                Side::Head => Triple { head: e, ..triple },
                Side::Tail => Triple { tail: e, ..triple },
            };
            if self.reject_self_loops && c.head == c.tail {
                continue;
            }
            if c == triple || (self.check_absence && self.known.contains(&c)) {
                continue;
            }
            return Ok((c, side));
        }
        Err(TransEError::CorruptionExhausted(CORRUPTION_RETRIES))
    }
}

/// Corrupt `triple` against `graph`, honouring its self-loop policy.
pub fn corrupt<R: Rng>(triple: Triple, graph: &KnowledgeGraph, rng: &mut R) -> Result<Triple, TransEError> {
    let known: HashSet<Triple> = graph.triples().collect();
    let c = Corruptor {
        known: &known,
        entity_count: graph.entity_count(),
        reject_self_loops: !graph.config().allow_self_loops,
        check_absence: true,
    };
    c.corrupt(triple, rng).map(|(t, _)| t)
}

/// Train on `triples`; `known` is the set corruptions must avoid.
pub fn train(
    triples: &[Triple],
    entity_count: usize,
    relation_count: usize,
    known: &HashSet<Triple>,
    config: &TransEConfig,
) -> Result<TransEModel, TransEError> {
    config.validate()?;
    if triples.is_empty() {
        return Err(TransEError::EmptyTrainingSet);
    }
    if entity_count < 2 {
        return Err(TransEError::TooFewEntities(entity_count));
    }
    let mut model = TransEModel::init(entity_count, relation_count, config);
    let corruptor =
        Corruptor { known, entity_count, reject_self_loops: true, check_absence: config.filter_corruptions };
    let d = config.dim;
    let mut rng = rng::stream(config.seed, 1);
    let mut order: Vec<usize> = (0..triples.len()).collect();
    let mut ent_grad = EmbeddingTable::zeros(entity_count, d);
    let mut rel_grad = EmbeddingTable::zeros(relation_count, d);
    let mut touched_e: Vec<usize> = Vec::new();
    let mut touched_r: Vec<usize> = Vec::new();

    for _ in 0..config.epochs {
        if config.unit_entities {
            model.entities.normalize_rows();
        }
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            for &i in batch {
                let pos = triples[i];
                let (neg, _) = match corruptor.corrupt(pos, &mut rng) {
                    Ok(c) => c,
                    // saturated neighbourhoods fall back to unchecked corruption
                    Err(TransEError::CorruptionExhausted(_)) => {
                        Corruptor { check_absence: false, ..corruptor.clone() }.corrupt(pos, &mut rng)?
                    }
                    Err(e) => return Err(e),
                };
                let pair = PairVectors {
                    head: model.entities.row(pos.head.0),
                    relation: model.relations.row(pos.relation.0),
                    tail: model.entities.row(pos.tail.0),
                    neg_head: model.entities.row(neg.head.0),
                    neg_tail: model.entities.row(neg.tail.0),
                };
                if pair.loss(config.margin, config.norm) <= 0.0 {
                    continue;
                }
                let g = pair.gradients(config.margin, config.norm);
                for (idx, grad) in
                    [(pos.head.0, &g.head), (pos.tail.0, &g.tail), (neg.head.0, &g.neg_head), (neg.tail.0, &g.neg_tail)]
                {
                    touched_e.push(idx);
                    ent_grad.row_mut(idx).iter_mut().zip(grad).for_each(|(a, b)| *a += b);
                }
                touched_r.push(pos.relation.0);
                rel_grad.row_mut(pos.relation.0).iter_mut().zip(&g.relation).for_each(|(a, b)| *a += b);
            }
            touched_e.sort_unstable();
            touched_e.dedup();
            touched_r.sort_unstable();
            touched_r.dedup();
            for &e in &touched_e {
                let g = ent_grad.row(e).to_vec();
                model.entities.row_mut(e).iter_mut().zip(&g).for_each(|(w, g)| *w -= config.learning_rate * g);
                ent_grad.row_mut(e).fill(0.0);
            }
            for &r in &touched_r {
                let g = rel_grad.row(r).to_vec();
                model.relations.row_mut(r).iter_mut().zip(&g).for_each(|(w, g)| *w -= config.learning_rate * g);
                rel_grad.row_mut(r).fill(0.0);
            }
            touched_e.clear();
            touched_r.clear();
        }
        if config.unit_entities {
            model.entities.normalize_rows();
        }
    }
    Ok(model)
}

/// Train on every triple of `graph`.
pub fn train_graph(graph: &KnowledgeGraph, config: &TransEConfig) -> Result<TransEModel, TransEError> {
    let triples: Vec<Triple> = graph.triples().collect();
    let known: HashSet<Triple> = triples.iter().copied().collect();
    train(&triples, graph.entity_count(), graph.relation_count(), &known, config)
}

/// Model file: entity embedding JSON plus relations, a config echo and the
/// graph version the model was trained or updated against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransEModelFile {
    pub dim: usize,
    pub entities: Map<String, Value>,
    pub relations: Map<String, Value>,
    pub config: TransEConfig,
    #[serde(default)]
    pub graph_version: u64,
}

impl TransEModelFile {
    pub fn new(model: &TransEModel, entity_names: &[String], relation_names: &[String], graph_version: u64) -> Self {
        TransEModelFile {
            dim: model.dim(),
            entities: model.entities.to_json_map(entity_names),
            relations: model.relations.to_json_map(relation_names),
            config: model.config.clone(),
            graph_version,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TransEError> {
        let file: TransEModelFile = serde_json::from_str(text).map_err(EmbeddingError::from)?;
        if file.dim != file.config.dim {
            return Err(TransEError::Embedding(EmbeddingError::Format(format!(
                "dim {} disagrees with config dim {}",
                file.dim, file.config.dim
            ))));
        }
        let names = |m: &Map<String, Value>| m.keys().cloned().collect::<Vec<_>>();
        EmbeddingTable::from_json_map(&file.entities, &names(&file.entities), file.dim)?;
        EmbeddingTable::from_json_map(&file.relations, &names(&file.relations), file.dim)?;
        Ok(file)
    }

    /// Model aligned to the given vocabularies.
    pub fn model_for(&self, entity_names: &[String], relation_names: &[String]) -> Result<TransEModel, TransEError> {
        Ok(TransEModel {
            entities: EmbeddingTable::from_json_map(&self.entities, entity_names, self.dim)?,
            relations: EmbeddingTable::from_json_map(&self.relations, relation_names, self.dim)?,
            config: self.config.clone(),
        })
    }
}
