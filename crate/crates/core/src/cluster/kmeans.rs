//! Lloyd's k-means with k-means++ seeding and seeded restarts.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{centroids, distinct_points, inertia, sq_dist, ClusterError, ClusterModel};
use crate::embedding::EmbeddingTable;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iter: usize,
    /// Independent k-means++ restarts; the lowest final inertia wins.
    pub n_init: usize,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansConfig { k, max_iter: 300, n_init: 10, seed }
    }
}

/// k-means with `KMeansConfig::new(k, seed)` defaults and the given iteration cap.
pub fn kmeans(points: &EmbeddingTable, k: usize, seed: u64, max_iter: usize) -> Result<ClusterModel, ClusterError> {
    kmeans_with(points, &KMeansConfig { max_iter, ..KMeansConfig::new(k, seed) })
}

pub fn kmeans_with(points: &EmbeddingTable, config: &KMeansConfig) -> Result<ClusterModel, ClusterError> {
    let (n, k) = (points.rows(), config.k);
    if k == 0 {
        return Err(ClusterError::KTooSmall { k, min: 1 });
    }
    if k > n {
        return Err(ClusterError::KTooLarge { k, n });
    }
    let distinct = distinct_points(points);
    if k > distinct {
        return Err(ClusterError::DuplicatePointsDegenerate { k, distinct });
    }
    if config.n_init == 0 {
        return Err(ClusterError::InvalidParameter("n_init must be >= 1"));
    }
    let mut best: Option<ClusterModel> = None;
    for run in 0..config.n_init {
        let mut rng = rng::stream(config.seed, run as u64);
        let model = lloyd(points, plus_plus(points, k, &mut rng), config.max_iter);
        if best.as_ref().is_none_or(|b| model.inertia < b.inertia) {
            best = Some(model);
        }
    }
    Ok(best.expect("n_init >= 1"))
}

fn plus_plus<R: Rng>(points: &EmbeddingTable, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.rows();
    let mut chosen = vec![points.row(rng.random_range(0..n)).to_vec()];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), &chosen[0])).collect();
    while chosen.len() < k {
        // k <= distinct points guarantees some positive weight
        let idx = WeightedIndex::new(&d2).expect("positive D^2 mass").sample(rng);
        let c = points.row(idx).to_vec();
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), &c));
        }
        chosen.push(c);
    }
    chosen
}

/// Nearest centroid, ties to the lowest index.
fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(p, centroid);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

fn assign(points: &EmbeddingTable, centroids: &[Vec<f64>]) -> Vec<usize> {
    points.iter_rows().map(|p| nearest(p, centroids)).collect()
}

/// Give each empty cluster the point farthest from its centroid, taken from a
/// cluster that can spare one.
fn repair_empty(points: &EmbeddingTable, assignments: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    loop {
        let mut sizes = vec![0usize; k];
        for &a in assignments.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else { return };
        let victim = (0..assignments.len())
            .filter(|&i| sizes[assignments[i]] > 1)
            .map(|i| (i, sq_dist(points.row(i), &centroids[assignments[i]])))
            .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((i, d)),
            })
            .map(|(i, _)| i)
            .expect("k <= n leaves a cluster with spare points");
        assignments[victim] = empty;
        centroids[empty] = points.row(victim).to_vec();
    }
}

fn lloyd(points: &EmbeddingTable, mut cents: Vec<Vec<f64>>, max_iter: usize) -> ClusterModel {
    let k = cents.len();
    let mut assignments = assign(points, &cents);
    let mut history = Vec::new();
    for _ in 0..max_iter.max(1) {
        repair_empty(points, &mut assignments, &mut cents);
        cents = centroids(points, &assignments, k);
        history.push(inertia(points, &assignments, &cents));
        let next = assign(points, &cents);
        if next == assignments {
            break;
        }
        assignments = next;
    }
    // the cap may stop between an assignment and its update
    repair_empty(points, &mut assignments, &mut cents);
    cents = centroids(points, &assignments, k);
    let final_inertia = inertia(points, &assignments, &cents);
    if history.last() != Some(&final_inertia) {
        history.push(final_inertia);
    }
    let silhouette = if k >= 2 { super::silhouette(points, &assignments).ok() } else { None };
    ClusterModel { k, assignments, centroids: cents, inertia: final_inertia, silhouette, inertia_history: history }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[&[f64]]) -> EmbeddingTable {
        EmbeddingTable::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn k_equals_n_gives_zero_inertia() {
        let p = table(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 5.0], &[3.0, 3.0]]);
        let m = kmeans(&p, 4, 1, 100).unwrap();
        assert_eq!(m.inertia, 0.0);
        let mut a = m.assignments.clone();
        a.sort_unstable();
        assert_eq!(a, vec![0, 1, 2, 3]);
    }

    #[test]
    fn two_segments_split_cleanly() {
        let p = table(&[&[0.0, 0.0], &[0.0, 1.0], &[50.0, 0.0], &[50.0, 1.0]]);
        let m = kmeans(&p, 2, 3, 100).unwrap();
        assert_eq!(m.assignments[0], m.assignments[1]);
        assert_eq!(m.assignments[2], m.assignments[3]);
        assert_ne!(m.assignments[0], m.assignments[2]);
        assert_eq!(m.inertia, 1.0);
    }

    #[test]
    fn deterministic() {
        let p = table(&[&[0.0], &[0.4], &[1.1], &[5.0], &[5.5], &[9.0], &[9.2]]);
        assert_eq!(kmeans(&p, 3, 7, 50).unwrap(), kmeans(&p, 3, 7, 50).unwrap());
    }

    #[test]
    fn k_errors() {
        let p = table(&[&[0.0], &[0.0], &[1.0]]);
        assert_eq!(kmeans(&p, 4, 0, 10), Err(ClusterError::KTooLarge { k: 4, n: 3 }));
        assert_eq!(kmeans(&p, 3, 0, 10), Err(ClusterError::DuplicatePointsDegenerate { k: 3, distinct: 2 }));
        assert_eq!(kmeans(&p, 0, 0, 10), Err(ClusterError::KTooSmall { k: 0, min: 1 }));
        assert_eq!(kmeans(&p, 2, 0, 10).unwrap().inertia, 0.0);
    }

    #[test]
    fn history_non_increasing() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i * 37 % 11) as f64, (i * 13 % 7) as f64]).collect();
        let p = EmbeddingTable::from_rows(&rows);
        let m = kmeans_with(&p, &KMeansConfig { n_init: 1, ..KMeansConfig::new(4, 2) }).unwrap();
        assert!(m.inertia_history.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}", m.inertia_history);
        assert_eq!(*m.inertia_history.last().unwrap(), m.inertia);
    }

    #[test]
    fn empty_cluster_repair() {
        // centroid 1 far away attracts nothing
        let p = table(&[&[0.0], &[1.0], &[2.0]]);
        let mut a = vec![0, 0, 0];
        let mut c = vec![vec![1.0], vec![100.0]];
        repair_empty(&p, &mut a, &mut c);
        assert_eq!(a, vec![1, 0, 0]);
        assert_eq!(c[1], vec![0.0]);
    }
}
