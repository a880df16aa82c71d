use kgraph_core::datasets::random_triples;
use kgraph_core::graph::{parse_graphml, parse_ntriples, parse_tsv, to_graphml, to_ntriples, to_tsv, GraphConfig};
use kgraph_core::{Direction, GraphDelta, KnowledgeGraph, RawTriple};
use proptest::prelude::*;

fn sorted(mut v: Vec<RawTriple>) -> Vec<RawTriple> {
    v.sort();
    v
}

fn graph(n: usize, ents: usize, rels: usize, seed: u64) -> (Vec<RawTriple>, KnowledgeGraph) {
    let raw = random_triples(n, ents, rels, seed);
    let g = KnowledgeGraph::from_raw(&raw, GraphConfig::default()).unwrap();
    (raw, g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degree_sums_match_triple_count(n in 1usize..120, ents in 2usize..25, rels in 1usize..6, seed in any::<u64>()) {
        let (_, g) = graph(n, ents, rels, seed);
        let ids = (0..g.entity_count()).map(kgraph_core::EntityId);
        let out: usize = ids.clone().map(|e| g.out_degree(e)).sum();
        let inn: usize = ids.map(|e| g.in_degree(e)).sum();
        prop_assert_eq!(out, g.total_count());
        prop_assert_eq!(inn, g.total_count());
    }

    #[test]
    fn ntriples_round_trip(n in 0usize..150, seed in any::<u64>()) {
        let (raw, g) = graph(n, 20, 4, seed);
        let back = parse_ntriples(&to_ntriples(&g)).unwrap();
        prop_assert_eq!(sorted(back), sorted(raw));
    }

    #[test]
    fn graphml_round_trip(n in 0usize..150, seed in any::<u64>()) {
        let (raw, g) = graph(n, 20, 4, seed);
        let back = parse_graphml(&to_graphml(&g)).unwrap();
        prop_assert_eq!(sorted(back), sorted(raw));
    }

    #[test]
    fn tsv_round_trip(n in 0usize..150, seed in any::<u64>()) {
        let (raw, g) = graph(n, 20, 4, seed);
        prop_assert_eq!(sorted(parse_tsv(&to_tsv(&g)).unwrap()), sorted(raw));
    }

    #[test]
    fn delta_then_inverse_restores(n in 1usize..80, dels in 0usize..20, adds in 0usize..20, seed in any::<u64>()) {
        let (raw, mut g) = graph(n, 15, 3, seed);
        let before = sorted(g.raw_multiset());
        let delta = GraphDelta {
            deletions: raw.iter().take(dels.min(raw.len())).cloned().collect(),
            additions: random_triples(adds, 30, 5, seed ^ 0x5eed),
        };
        g.apply_delta(&delta).unwrap();
        g.apply_delta(&delta.inverse()).unwrap();
        prop_assert_eq!(sorted(g.raw_multiset()), before);
    }

    #[test]
    fn entity_ids_are_stable(n in 1usize..80, seed in any::<u64>()) {
        let (raw, mut g) = graph(n, 15, 3, seed);
        let names: Vec<String> = g.entities().to_vec();
        let delta = GraphDelta { deletions: raw[..raw.len() / 2].to_vec(), additions: random_triples(10, 40, 3, seed) };
        g.apply_delta(&delta).unwrap();
        for (i, name) in names.iter().enumerate() {
            prop_assert_eq!(g.entity_id(name).map(|e| e.0), Some(i));
        }
    }
}

#[test]
fn failed_delta_changes_nothing() {
    let (_, mut g) = graph(30, 10, 2, 1);
    let before = sorted(g.raw_multiset());
    let version = g.version();
    let delta = GraphDelta {
        additions: vec![RawTriple::new("fresh", "rel", "other")],
        deletions: vec![RawTriple::new("absent", "rel", "nowhere")],
    };
    assert!(g.apply_delta(&delta).is_err());
    assert_eq!(sorted(g.raw_multiset()), before);
    assert_eq!(g.version(), version);
    assert!(g.entity_id("fresh").is_none());
    assert!(g.neighbors_of("absent", Direction::Both).is_err());
}
