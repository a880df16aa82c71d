//! Skip-gram with negative sampling.
//!
//! Objective per (target t, context c, negatives n₁..n_k):
//! `log σ(u_c·v_t) + Σ log σ(−u_n·v_t)`, maximised by SGD. `v` are the
//! target vectors returned as the embedding table, `u` the context vectors.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::{WalkConfig, WalkError};
use crate::embedding::{dot, EmbeddingTable};
use crate::rng;

const NEGATIVE_STREAM: u64 = 1 << 62;
const INIT_STREAM: u64 = (1 << 62) + 1;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn log_sigmoid(x: f64) -> f64 {
    // log σ(x) = −log(1 + e^{−x}), computed without overflow
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn sgns_objective(target: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    log_sigmoid(dot(context, target)) + negatives.iter().map(|n| log_sigmoid(-dot(n, target))).sum::<f64>()
}

/// Gradient of [`sgns_objective`] with respect to each argument.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradients {
    pub target: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn sgns_gradients(target: &[f64], context: &[f64], negatives: &[&[f64]]) -> SgnsGradients {
    let g_pos = 1.0 - sigmoid(dot(context, target));
    let mut d_target: Vec<f64> = context.iter().map(|u| g_pos * u).collect();
    let d_context = target.iter().map(|v| g_pos * v).collect();
    let mut d_negs = Vec::with_capacity(negatives.len());
    for n in negatives {
        let g_neg = -sigmoid(dot(n, target));
        for (d, u) in d_target.iter_mut().zip(n.iter()) {
            *d += g_neg * u;
        }
        d_negs.push(target.iter().map(|v| g_neg * v).collect());
    }
    SgnsGradients { target: d_target, context: d_context, negatives: d_negs }
}

/// Train target vectors for `vocab_size` entities from `walks`.
///
/// Single-threaded and fully determined by `config.seed`. Negatives are
/// drawn from walk-corpus unigram counts raised to the 3/4 power; the
/// learning rate decays linearly to 1e-4 of its initial value.
pub fn train_skipgram(
    walks: &[Vec<usize>],
    vocab_size: usize,
    config: &WalkConfig,
) -> Result<EmbeddingTable, WalkError> {
    config.validate()?;
    if walks.iter().all(Vec::is_empty) {
        return Err(WalkError::EmptyCorpus);
    }
    let mut counts = vec![0usize; vocab_size];
    for &e in walks.iter().flatten() {
        if e >= vocab_size {
            return Err(WalkError::UnknownEntity { entity: e, size: vocab_size });
        }
        counts[e] += 1;
    }

    let d = config.dim;
    let mut init_rng = rng::stream(config.seed, INIT_STREAM);
    let mut target = EmbeddingTable::uniform(vocab_size, d, 0.5 / d as f64, &mut init_rng);
    if config.epochs == 0 {
        return Ok(target);
    }
    let mut context = EmbeddingTable::zeros(vocab_size, d);

    let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
    let sampler = WeightedIndex::new(&weights).map_err(|_| WalkError::EmptyCorpus)?;
    let mut rng = rng::stream(config.seed, NEGATIVE_STREAM);

    let w = config.window;
    let pairs_per_epoch: usize = walks
        .iter()
        .map(|walk| {
            let n = walk.len();
            (0..n).map(|i| (i + w + 1).min(n) - i.saturating_sub(w) - 1).sum::<usize>()
        })
        .sum();
    let total = (pairs_per_epoch * config.epochs).max(1) as f64;
    let mut processed = 0usize;
    let mut grad = vec![0.0; d];

    for _ in 0..config.epochs {
        for walk in walks {
            for (i, &t) in walk.iter().enumerate() {
                let lo = i.saturating_sub(w);
                let hi = (i + w + 1).min(walk.len());
                for (j, &c) in walk.iter().enumerate().take(hi).skip(lo) {
                    if j == i {
                        continue;
                    }
                    let lr = config.learning_rate * (1.0 - processed as f64 / total).max(1e-4);
                    processed += 1;
                    grad.iter_mut().for_each(|g| *g = 0.0);

                    let v_t = target.row(t).to_vec();
                    let g = lr * (1.0 - sigmoid(dot(context.row(c), &v_t)));
                    for (acc, u) in grad.iter_mut().zip(context.row(c)) {
                        *acc += g * u;
                    }
                    for (u, v) in context.row_mut(c).iter_mut().zip(&v_t) {
                        *u += g * v;
                    }
                    for _ in 0..config.negatives {
                        let n = sampler.sample(&mut rng);
                        if n == c {
                            continue;
                        }
                        let g = -lr * sigmoid(dot(context.row(n), &v_t));
                        for (acc, u) in grad.iter_mut().zip(context.row(n)) {
                            *acc += g * u;
                        }
                        for (u, v) in context.row_mut(n).iter_mut().zip(&v_t) {
                            *u += g * v;
                        }
                    }
                    for (v, g) in target.row_mut(t).iter_mut().zip(&grad) {
                        *v += g;
                    }
                }
            }
        }
    }
    Ok(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::cosine;

    #[test]
    fn log_sigmoid_is_stable() {
        assert!((log_sigmoid(0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!(log_sigmoid(-800.0).is_finite());
        assert!(log_sigmoid(800.0) == 0.0);
    }

    #[test]
    fn shape_and_finiteness() {
        let walks: Vec<Vec<usize>> = (0..10).map(|i| vec![i, (i + 1) % 10, (i + 2) % 10]).collect();
        let cfg = WalkConfig { dim: 8, epochs: 2, ..Default::default() };
        let t = train_skipgram(&walks, 10, &cfg).unwrap();
        assert_eq!((t.rows(), t.dim()), (10, 8));
        assert!(t.is_finite());
    }

    #[test]
    fn zero_epochs_returns_initialisation() {
        let walks = vec![vec![0, 1, 2]];
        let cfg = WalkConfig { dim: 4, epochs: 0, seed: 5, ..Default::default() };
        let a = train_skipgram(&walks, 3, &cfg).unwrap();
        let mut rng = rng::stream(5, INIT_STREAM);
        assert_eq!(a, EmbeddingTable::uniform(3, 4, 0.125, &mut rng));
        assert!(a.to_rows().iter().flatten().all(|x| x.abs() <= 0.125));
    }

    #[test]
    fn empty_corpus() {
        assert_eq!(train_skipgram(&[], 3, &WalkConfig::default()), Err(WalkError::EmptyCorpus));
        assert_eq!(train_skipgram(&[vec![]], 3, &WalkConfig::default()), Err(WalkError::EmptyCorpus));
    }

    #[test]
    fn out_of_vocabulary_walk() {
        assert_eq!(
            train_skipgram(&[vec![0, 5]], 3, &WalkConfig::default()),
            Err(WalkError::UnknownEntity { entity: 5, size: 3 })
        );
    }

    #[test]
    fn co_occurring_nodes_end_up_closer() {
        // x=0, y=1 always co-occur; z=2 only with filler nodes 3,4.
        let mut walks = Vec::new();
        for _ in 0..200 {
            walks.push(vec![0, 1, 0, 1, 0, 1]);
            walks.push(vec![2, 3, 4, 3, 2, 4]);
        }
        let cfg = WalkConfig { dim: 8, window: 2, epochs: 5, seed: 1, ..Default::default() };
        let t = train_skipgram(&walks, 5, &cfg).unwrap();
        assert!(cosine(t.row(0), t.row(1)) > cosine(t.row(0), t.row(2)));
    }

    #[test]
    fn same_seed_same_table() {
        let walks = vec![vec![0, 1, 2, 1, 0], vec![2, 1, 0]];
        let cfg = WalkConfig { dim: 6, epochs: 3, seed: 9, ..Default::default() };
        assert_eq!(train_skipgram(&walks, 3, &cfg).unwrap(), train_skipgram(&walks, 3, &cfg).unwrap());
    }
}
