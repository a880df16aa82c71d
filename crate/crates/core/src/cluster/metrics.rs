//! External partition agreement: normalised mutual information and purity.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{kmeans_with, ClusterError, KMeansConfig};
use crate::embedding::EmbeddingTable;

fn counts<T: std::hash::Hash + Eq + Copy>(xs: &[T]) -> HashMap<T, usize> {
    let mut m = HashMap::new();
    for &x in xs {
        *m.entry(x).or_insert(0) += 1;
    }
    m
}

fn entropy(c: &HashMap<impl std::hash::Hash + Eq, usize>, n: f64) -> f64 {
    c.values().map(|&v| v as f64 / n).map(|p| -p * p.ln()).sum()
}

/// Mutual information over the arithmetic mean of the two entropies; 1 when
/// both labellings are constant.
pub fn nmi(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labellings must align");
    let n = a.len() as f64;
    if a.is_empty() {
        return 1.0;
    }
    let (ca, cb) = (counts(a), counts(b));
    let joint = counts(&a.iter().copied().zip(b.iter().copied()).collect::<Vec<_>>());
    let (ha, hb) = (entropy(&ca, n), entropy(&cb, n));
    if ha == 0.0 && hb == 0.0 {
        return 1.0;
    }
    let mut mi = 0.0;
    for (&(x, y), &c) in &joint {
        let pxy = c as f64 / n;
        mi += pxy * (pxy * n * n / (ca[&x] as f64 * cb[&y] as f64)).ln();
    }
    (mi / ((ha + hb) / 2.0)).clamp(0.0, 1.0)
}

/// Fraction of points in the majority class of their cluster.
pub fn purity(clusters: &[usize], classes: &[usize]) -> f64 {
    assert_eq!(clusters.len(), classes.len(), "labellings must align");
    if clusters.is_empty() {
        return 1.0;
    }
    let joint = counts(&clusters.iter().copied().zip(classes.iter().copied()).collect::<Vec<_>>());
    let mut best: HashMap<usize, usize> = HashMap::new();
    for (&(c, _), &v) in &joint {
        let e = best.entry(c).or_insert(0);
        *e = (*e).max(v);
    }
    best.values().sum::<usize>() as f64 / clusters.len() as f64
}

/// Pairwise NMI between k-means runs under different seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedAgreement {
    pub seeds: Vec<u64>,
    pub pairwise_nmi: Vec<Vec<f64>>,
    pub mean_nmi: f64,
}

pub fn cross_seed_agreement(points: &EmbeddingTable, k: usize, seeds: &[u64]) -> Result<SeedAgreement, ClusterError> {
    let runs = seeds
        .iter()
        .map(|&s| kmeans_with(points, &KMeansConfig { n_init: 1, ..KMeansConfig::new(k, s) }).map(|m| m.assignments))
        .collect::<Result<Vec<_>, _>>()?;
    let m = runs.len();
    let mut pairwise = vec![vec![1.0; m]; m];
    let (mut total, mut pairs) = (0.0, 0usize);
    for i in 0..m {
        for j in i + 1..m {
            let v = nmi(&runs[i], &runs[j]);
            pairwise[i][j] = v;
            pairwise[j][i] = v;
            total += v;
            pairs += 1;
        }
    }
    let mean_nmi = if pairs == 0 { 1.0 } else { total / pairs as f64 };
    Ok(SeedAgreement { seeds: seeds.to_vec(), pairwise_nmi: pairwise, mean_nmi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nmi_identity_and_permutation() {
        assert!((nmi(&[0, 0, 1, 1, 2], &[2, 2, 0, 0, 1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nmi_independent_is_zero() {
        assert!(nmi(&[0, 0, 1, 1], &[0, 1, 0, 1]).abs() < 1e-12);
    }

    #[test]
    fn nmi_hand_computed() {
        // a = [0,0,1,1], b = [0,0,0,1]: H(a)=ln2, H(b)=-(3/4)ln(3/4)-(1/4)ln(1/4)
        let ha = 2f64.ln();
        let hb = -(0.75 * 0.75f64.ln()) - 0.25 * 0.25f64.ln();
        // I = H(b) - H(b|a) = hb - (1/2)(-(1/2)ln(1/2)*2)
        let mi = hb - 0.5 * 2f64.ln();
        let expected = mi / ((ha + hb) / 2.0);
        assert!((nmi(&[0, 0, 1, 1], &[0, 0, 0, 1]) - expected).abs() < 1e-12);
    }

    #[test]
    fn purity_values() {
        assert_eq!(purity(&[0, 0, 1, 1], &[5, 5, 6, 6]), 1.0);
        assert_eq!(purity(&[0, 0, 0, 1], &[1, 1, 2, 2]), 0.75);
        assert_eq!(purity(&[0, 0, 0, 0], &[1, 2, 1, 2]), 0.5);
    }

    #[test]
    fn agreement_on_clear_structure() {
        let rows: Vec<Vec<f64>> =
            (0..20).map(|i| vec![if i < 10 { 0.0 } else { 50.0 } + (i % 10) as f64 * 0.1]).collect();
        let a = cross_seed_agreement(&EmbeddingTable::from_rows(&rows), 2, &[1, 2, 3]).unwrap();
        assert_eq!(a.pairwise_nmi.len(), 3);
        assert!((a.mean_nmi - 1.0).abs() < 1e-12);
    }
}
