use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ClusterError;
use crate::embedding::{cosine, l2_distance, EmbeddingTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    /// `1 − cos(a, b)`.
    Cosine,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => l2_distance(a, b),
            Metric::Cosine => 1.0 - cosine(a, b),
        }
    }
}

/// Mean Euclidean silhouette of a labelling.
pub fn silhouette(points: &EmbeddingTable, assignments: &[usize]) -> Result<f64, ClusterError> {
    silhouette_with(points, assignments, Metric::Euclidean)
}

/// Mean over points of `(b − a) / max(a, b)`; members of singleton clusters
/// contribute 0. Labels need not be contiguous.
pub fn silhouette_with(points: &EmbeddingTable, assignments: &[usize], metric: Metric) -> Result<f64, ClusterError> {
    let n = points.rows();
    if assignments.len() != n {
        return Err(ClusterError::LengthMismatch { points: n, assignments: assignments.len() });
    }
    let labels = super::relabel(assignments);
    let k = labels.iter().max().map_or(0, |m| m + 1);
    if k < 2 {
        return Err(ClusterError::SingleCluster);
    }
    let mut sizes = vec![0usize; k];
    for &l in &labels {
        sizes[l] += 1;
    }
    let per_point: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let own = labels[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for j in 0..n {
                if j != i {
                    sums[labels[j]] += metric.distance(points.row(i), points.row(j));
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k).filter(|&c| c != own).map(|c| sums[c] / sizes[c] as f64).fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom == 0.0 {
                0.0
            } else {
                (b - a) / denom
            }
        })
        .collect();
    Ok(per_point.iter().sum::<f64>() / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicated_points_score_one() {
        let p = EmbeddingTable::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0], vec![9.0, 9.0], vec![9.0, 9.0]]);
        assert_eq!(silhouette(&p, &[0, 0, 1, 1]).unwrap(), 1.0);
    }

    #[test]
    fn single_cluster_rejected() {
        let p = EmbeddingTable::from_rows(&[vec![0.0], vec![1.0]]);
        assert_eq!(silhouette(&p, &[3, 3]), Err(ClusterError::SingleCluster));
    }

    #[test]
    fn hand_computed_line() {
        // clusters {0, 1} and {4}: s0 = (4-1)/4, s1 = (3-1)/3, singleton 0
        let p = EmbeddingTable::from_rows(&[vec![0.0], vec![1.0], vec![4.0]]);
        let expected = (0.75 + 2.0 / 3.0) / 3.0;
        assert!((silhouette(&p, &[0, 0, 1]).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn cosine_metric() {
        let p = EmbeddingTable::from_rows(&[vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0], vec![0.0, 3.0]]);
        assert!((silhouette_with(&p, &[0, 0, 1, 1], Metric::Cosine).unwrap() - 1.0).abs() < 1e-12);
    }
}
