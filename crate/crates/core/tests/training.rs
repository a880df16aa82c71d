use std::collections::HashSet;

use kgraph_core::datasets::{planted_grid, random_graph};
use kgraph_core::transe::{corrupt, train, Norm, PairVectors, TransEConfig};
use kgraph_core::walk::{sgns_gradients, sgns_objective};
use kgraph_core::Triple;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;

/// `‖a − n‖ / max(‖a‖, ‖n‖, 1e-4)`; the floor keeps finite-difference
/// round-off on an exactly zero gradient from counting as a relative error.
fn rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff = analytic.iter().zip(numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let scale = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / scale(analytic).max(scale(numeric)).max(1e-4)
}

/// Central differences of `f` with respect to the `which`-th argument.
fn numeric_grad(args: &[Vec<f64>], which: usize, f: &dyn Fn(&[Vec<f64>]) -> f64) -> Vec<f64> {
    (0..args[which].len())
        .map(|i| {
            let mut plus = args.to_vec();
            let mut minus = args.to_vec();
            plus[which][i] += H;
            minus[which][i] -= H;
            (f(&plus) - f(&minus)) / (2.0 * H)
        })
        .collect()
}

fn pair(a: &[Vec<f64>]) -> PairVectors<'_> {
    PairVectors { head: &a[0], relation: &a[1], tail: &a[2], neg_head: &a[3], neg_tail: &a[4] }
}

fn random_vec(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-scale..scale)).collect()
}

#[test]
fn sgns_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let d = rng.random_range(1..10);
        let args: Vec<Vec<f64>> = (0..3).map(|_| random_vec(&mut rng, d, 1.5)).collect();
        let f = |a: &[Vec<f64>]| sgns_objective(&a[0], &a[1], &[&a[2]]);
        let g = sgns_gradients(&args[0], &args[1], &[&args[2]]);
        for (which, analytic) in [&g.target, &g.context, &g.negatives[0]].into_iter().enumerate() {
            let err = rel_err(analytic, &numeric_grad(&args, which, &f));
            assert!(err <= 1e-5, "argument {which}: relative error {err}");
        }
    }
}

#[test]
fn transe_hinge_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for norm in [Norm::L1, Norm::L2] {
        let mut checked = 0;
        while checked < 100 {
            let d = rng.random_range(1..8);
            let args: Vec<Vec<f64>> = (0..5).map(|_| random_vec(&mut rng, d, 1.0)).collect();
            let margin = rng.random_range(0.1..3.0);
            let loss = pair(&args).loss(margin, norm);
            let diff = |h: &[f64], t: &[f64]| -> Vec<f64> { (0..d).map(|i| h[i] + args[1][i] - t[i]).collect() };
            let near_kink = loss.abs() < 1e-3
                || diff(&args[0], &args[2]).iter().chain(&diff(&args[3], &args[4])).any(|x| x.abs() < 1e-3);
            if near_kink {
                continue;
            }
            checked += 1;
            let f = |a: &[Vec<f64>]| pair(a).loss(margin, norm);
            let g = pair(&args).gradients(margin, norm);
            for (which, analytic) in [&g.head, &g.relation, &g.tail, &g.neg_head, &g.neg_tail].into_iter().enumerate() {
                let err = rel_err(analytic, &numeric_grad(&args, which, &f));
                assert!(err <= 1e-4, "{norm:?} argument {which}: relative error {err}");
            }
        }
    }
}

#[test]
fn corruption_side_is_balanced() {
    let g = random_graph(200, 50, 3, 8);
    let triples: Vec<Triple> = g.triples().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut heads = 0;
    for i in 0..10_000 {
        let t = triples[i % triples.len()];
        let c = corrupt(t, &g, &mut rng).unwrap();
        assert!(!g.contains(c));
        assert!((c.head == t.head) != (c.tail == t.tail));
        if c.head != t.head {
            heads += 1;
        }
    }
    let ratio = heads as f64 / 10_000.0;
    assert!((0.47..=0.53).contains(&ratio), "head ratio {ratio}");
}

#[test]
fn training_separates_true_from_corrupted() {
    let p = planted_grid(1);
    let known: HashSet<Triple> = p.all_triples();
    let cfg = TransEConfig { dim: 16, epochs: 200, batch_size: 16, seed: 2, ..Default::default() };
    let m = train(&p.train, p.graph.entity_count(), p.graph.relation_count(), &known, &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let score = |t: Triple| m.score(t.head, t.relation, t.tail).unwrap();
    let pos: f64 = p.train.iter().map(|&t| score(t)).sum::<f64>() / p.train.len() as f64;
    let neg: f64 =
        p.train.iter().map(|&t| score(corrupt(t, &p.graph, &mut rng).unwrap())).sum::<f64>() / p.train.len() as f64;
    assert!(pos < neg, "true {pos} vs corrupted {neg}");
}

#[test]
fn training_is_seed_deterministic() {
    let p = planted_grid(2);
    let known = p.all_triples();
    let cfg = TransEConfig { dim: 8, epochs: 20, batch_size: 8, seed: 9, ..Default::default() };
    let run = || train(&p.train, p.graph.entity_count(), p.graph.relation_count(), &known, &cfg).unwrap();
    assert_eq!(run(), run());
}
