//! Small bundled and generated datasets with known structure.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::extract::{parse_conllu, Sentence};
use crate::graph::{parse_tsv, EntityId, GraphConfig, KnowledgeGraph, RawTriple, Triple};
use crate::rng;

const KARATE_TSV: &str = include_str!("../data/karate.tsv");
const KARATE_FACTIONS: &str = include_str!("../data/karate_factions.tsv");
const CORPUS_CONLLU: &str = include_str!("../data/corpus.conllu");
const GOLDEN_TRIPLES: &str = include_str!("../data/golden_triples.tsv");

/// Zachary's karate club: 34 members `n0..n33`, 78 `knows` edges.
pub fn karate_graph() -> KnowledgeGraph {
    let triples = parse_tsv(KARATE_TSV).expect("bundled karate graph parses");
    let mut g = KnowledgeGraph::new();
    for i in 0..34 {
        g.intern_entity(&format!("n{i}")).expect("valid name");
    }
    for t in &triples {
        g.add_raw(t).expect("bundled karate graph is valid");
    }
    g
}

/// Faction (0 = "Mr. Hi", 1 = "Officer") per karate entity id.
pub fn karate_factions(graph: &KnowledgeGraph) -> Vec<usize> {
    let mut labels = vec![0; graph.entity_count()];
    for line in KARATE_FACTIONS.lines().filter(|l| !l.trim().is_empty()) {
        let (node, faction) = line.split_once('\t').expect("node<TAB>faction");
        if let Some(id) = graph.entity_id(node) {
            labels[id.0] = usize::from(faction != "Mr. Hi");
        }
    }
    labels
}

/// Dependency-parsed sentences paired with their expected triples.
pub fn golden_corpus() -> (Vec<Sentence>, Vec<RawTriple>) {
    let sentences = parse_conllu(CORPUS_CONLLU).expect("bundled corpus parses");
    let golden = parse_tsv(GOLDEN_TRIPLES).expect("bundled golden triples parse");
    (sentences, golden)
}

pub fn corpus_text() -> &'static str {
    CORPUS_CONLLU
}

pub fn golden_text() -> &'static str {
    GOLDEN_TRIPLES
}

/// Entities on a `width × height` grid linked by fixed offsets.
#[derive(Debug, Clone)]
pub struct PlantedGrid {
    pub graph: KnowledgeGraph,
    pub coords: Vec<(i32, i32)>,
    pub train: Vec<Triple>,
    pub test: Vec<Triple>,
}

impl PlantedGrid {
    pub fn all_triples(&self) -> HashSet<Triple> {
        self.graph.triples().collect()
    }
}

/// Offsets of the four grid relations.
pub const GRID_RELATIONS: [(&str, (i32, i32)); 4] =
    [("east", (1, 0)), ("north", (0, 1)), ("northeast", (1, 1)), ("southeast", (1, -1))];

/// 40 entities on an 8 × 5 grid, four offset relations, 90/10 train/test
/// split shuffled under `seed`. Every entity and relation appears in train.
pub fn planted_grid(seed: u64) -> PlantedGrid {
    let (width, height) = (8, 5);
    let mut g = KnowledgeGraph::new();
    let mut coords = Vec::new();
    for y in 0..height {
        for x in 0..width {
            g.intern_entity(&format!("g{x}_{y}")).expect("valid name");
            coords.push((x, y));
        }
    }
    for (x, y) in coords.clone() {
        for (rel, (dx, dy)) in GRID_RELATIONS {
            let (tx, ty) = (x + dx, y + dy);
            if (0..width).contains(&tx) && (0..height).contains(&ty) {
                g.add_triple(&format!("g{x}_{y}"), rel, &format!("g{tx}_{ty}")).expect("valid triple");
            }
        }
    }
    let mut triples: Vec<Triple> = g.triples().collect();
    let mut r = rng::stream(seed, 0);
    let n_test = triples.len() / 10;
    // reshuffle until the training split covers every entity and relation
    loop {
        triples.shuffle(&mut r);
        let train = &triples[n_test..];
        let ents: HashSet<EntityId> = train.iter().flat_map(|t| [t.head, t.tail]).collect();
        let rels: HashSet<_> = train.iter().map(|t| t.relation).collect();
        if ents.len() == g.entity_count() && rels.len() == g.relation_count() {
            break;
        }
    }
    let test = triples[..n_test].to_vec();
    let train = triples[n_test..].to_vec();
    PlantedGrid { graph: g, coords, train, test }
}

/// People split between two cities, plus noise edges.
#[derive(Debug, Clone)]
pub struct PlantedLivesIn {
    pub graph: KnowledgeGraph,
    pub persons: Vec<EntityId>,
    /// 0 for `CityA`, 1 for `CityB`, aligned with `persons`.
    pub truth: Vec<usize>,
}

/// 20 people, half `livesIn→CityA` and half `livesIn→CityB`; each also
/// `knows` two random people and `likes` one of ten random items.
pub fn planted_lives_in(seed: u64) -> PlantedLivesIn {
    let mut g = KnowledgeGraph::new();
    let mut r = rng::stream(seed, 0);
    let n = 20;
    let persons: Vec<EntityId> =
        (0..n).map(|i| g.intern_entity(&format!("person{i:02}")).expect("valid name")).collect();
    let truth: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
    for (i, &city) in truth.iter().enumerate() {
        let me = format!("person{i:02}");
        g.add_triple(&me, "livesIn", ["CityA", "CityB"][city]).expect("valid triple");
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.shuffle(&mut r);
        for &j in &others[..2] {
            g.add_triple(&me, "knows", &format!("person{j:02}")).expect("valid triple");
        }
        let item = r.random_range(0..10);
        g.add_triple(&me, "likes", &format!("item{item}")).expect("valid triple");
    }
    PlantedLivesIn { graph: g, persons, truth }
}

/// `n` random triples over awkward names (spaces, quotes, markup, non-ASCII),
/// never self-loops; duplicates are possible.
pub fn random_triples(n: usize, entities: usize, relations: usize, seed: u64) -> Vec<RawTriple> {
    const STEMS: [&str; 8] = ["alpha", "Beta Gamma", "quote\"d", "back\\slash", "a<b>&c", "café", "x{y}|z", "^caret`"];
    let mut r = rng::stream(seed, 0);
    let name = |i: usize| format!("{} {i}", STEMS[i % STEMS.len()]);
    let rel = |i: usize| format!("rel:{}#{i}", STEMS[(i + 3) % STEMS.len()]);
    (0..n)
        .map(|_| {
            let h = r.random_range(0..entities);
            let mut t = r.random_range(0..entities - 1);
            if t >= h {
                t += 1;
            }
            RawTriple::new(name(h), rel(r.random_range(0..relations)), name(t))
        })
        .collect()
}

/// Graph built from [`random_triples`].
pub fn random_graph(n: usize, entities: usize, relations: usize, seed: u64) -> KnowledgeGraph {
    KnowledgeGraph::from_raw(&random_triples(n, entities, relations, seed), GraphConfig::default())
        .expect("generated triples are valid")
}
