//! Clustering of entity embeddings: k-means, agglomerative, model selection
//! and the explainable rule-driven loop.

mod agglomerative;
mod excut;
mod kmeans;
mod metrics;
mod report;
mod select;
mod silhouette;

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingTable;

pub use agglomerative::{agglomerative, Linkage};
pub use excut::{excut_loop, mine_rules, ClusterRule, ExcutConfig, ExcutResult, RuleDirection};
pub use kmeans::{kmeans, kmeans_with, KMeansConfig};
pub use metrics::{cross_seed_agreement, nmi, purity, SeedAgreement};
pub use report::{clustering_report, ClusteringReport};
pub use select::{
    compare_selectors, elbow_from_curve, gap_statistic, select_k_elbow, select_k_silhouette, GapStatistic,
    SelectorSummary,
};
pub use silhouette::{silhouette, silhouette_with, Metric};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClusterError {
    #[error("k must be at least {min}, got {k}")]
    KTooSmall { k: usize, min: usize },
    #[error("k = {k} exceeds the number of points ({n})")]
    KTooLarge { k: usize, n: usize },
    #[error("k = {k} exceeds the number of distinct points ({distinct})")]
    DuplicatePointsDegenerate { k: usize, distinct: usize },
    #[error("silhouette needs at least two clusters")]
    SingleCluster,
    #[error("assignments cover {assignments} points but there are {points}")]
    LengthMismatch { points: usize, assignments: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// A partition of `n` points into `k` non-empty clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Mean silhouette; absent when `k < 2`.
    pub silhouette: Option<f64>,
    /// Inertia after each Lloyd update (k-means only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inertia_history: Vec<f64>,
}

impl ClusterModel {
    /// Model for a given labelling: member-mean centroids, inertia and silhouette.
    pub fn from_assignments(points: &EmbeddingTable, assignments: Vec<usize>) -> Result<Self, ClusterError> {
        if assignments.len() != points.rows() {
            return Err(ClusterError::LengthMismatch { points: points.rows(), assignments: assignments.len() });
        }
        let assignments = relabel(&assignments);
        let k = assignments.iter().max().map_or(0, |m| m + 1);
        let centroids = centroids(points, &assignments, k);
        let inertia = inertia(points, &assignments, &centroids);
        let silhouette = if k >= 2 { silhouette(points, &assignments).ok() } else { None };
        Ok(ClusterModel { k, assignments, centroids, inertia, silhouette, inertia_history: Vec::new() })
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.assignments.iter().enumerate().filter(|(_, &a)| a == cluster).map(|(i, _)| i).collect()
    }

    /// `entity,cluster` CSV.
    pub fn assignments_csv(&self, names: &[String]) -> String {
        let mut out = String::from("entity,cluster\n");
        for (name, a) in names.iter().zip(&self.assignments) {
            let _ = writeln!(out, "{name},{a}");
        }
        out
    }
}

/// Relabel clusters in order of first appearance.
pub fn relabel(assignments: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    assignments
        .iter()
        .map(|&a| {
            let next = map.len();
            *map.entry(a).or_insert(next)
        })
        .collect()
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn centroids(points: &EmbeddingTable, assignments: &[usize], k: usize) -> Vec<Vec<f64>> {
    let d = points.dim();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (i, &a) in assignments.iter().enumerate() {
        counts[a] += 1;
        sums[a].iter_mut().zip(points.row(i)).for_each(|(s, x)| *s += x);
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|x| *x /= c as f64);
        }
    }
    sums
}

pub(crate) fn inertia(points: &EmbeddingTable, assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    assignments.iter().enumerate().map(|(i, &a)| sq_dist(points.row(i), &centroids[a])).sum()
}

pub(crate) fn distinct_points(points: &EmbeddingTable) -> usize {
    let mut rows: Vec<Vec<u64>> = points.iter_rows().map(|r| r.iter().map(|x| x.to_bits()).collect()).collect();
    rows.sort_unstable();
    rows.dedup();
    rows.len()
}
