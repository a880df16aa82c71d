//! Choosing the number of clusters: silhouette, elbow and gap statistic.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{kmeans_with, ClusterError, ClusterModel, KMeansConfig};
use crate::embedding::EmbeddingTable;
use crate::rng;

fn fit(points: &EmbeddingTable, k: usize, seed: u64) -> Result<ClusterModel, ClusterError> {
    kmeans_with(points, &KMeansConfig::new(k, seed))
}

/// k-means for every `k ∈ [2, k_max]`; the highest mean silhouette wins, ties
/// to the smallest `k`.
pub fn select_k_silhouette(
    points: &EmbeddingTable,
    k_max: usize,
    seed: u64,
) -> Result<(usize, ClusterModel), ClusterError> {
    if k_max < 2 {
        return Err(ClusterError::KTooSmall { k: k_max, min: 2 });
    }
    let mut best: Option<(usize, ClusterModel)> = None;
    for k in 2..=k_max {
        let model = fit(points, k, seed)?;
        let s = model.silhouette.expect("k >= 2");
        if best.as_ref().is_none_or(|(_, b)| s > b.silhouette.expect("k >= 2")) {
            best = Some((k, model));
        }
    }
    Ok(best.expect("k_max >= 2"))
}

/// Index (as `k`, curve starting at `k = 1`) of the interior point farthest
/// from the chord joining the first and last points; ties to the smallest `k`.
pub fn elbow_from_curve(inertia: &[f64]) -> Result<usize, ClusterError> {
    let m = inertia.len();
    if m < 3 {
        return Err(ClusterError::KTooSmall { k: m, min: 3 });
    }
    let (x0, y0) = (1.0, inertia[0]);
    let (dx, dy) = ((m - 1) as f64, inertia[m - 1] - inertia[0]);
    let len = (dx * dx + dy * dy).sqrt();
    let mut best = (2, f64::NEG_INFINITY);
    for (i, &y) in inertia.iter().enumerate().take(m - 1).skip(1) {
        let x = (i + 1) as f64;
        let dist = (dx * (y - y0) - dy * (x - x0)).abs() / len;
        if dist > best.1 {
            best = (i + 1, dist);
        }
    }
    Ok(best.0)
}

/// Inertia curve over `k ∈ [1, k_max]`, then [`elbow_from_curve`].
pub fn select_k_elbow(points: &EmbeddingTable, k_max: usize, seed: u64) -> Result<usize, ClusterError> {
    if k_max < 3 {
        return Err(ClusterError::KTooSmall { k: k_max, min: 3 });
    }
    let curve = (1..=k_max).map(|k| fit(points, k, seed).map(|m| m.inertia)).collect::<Result<Vec<_>, _>>()?;
    elbow_from_curve(&curve)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapStatistic {
    pub k: usize,
    /// `gap[k-1]` for `k ∈ [1, k_max]`.
    pub gap: Vec<f64>,
    /// Standard-error corrections `s_k`, same indexing.
    pub s: Vec<f64>,
}

fn log_w(inertia: f64) -> f64 {
    inertia.max(f64::MIN_POSITIVE).ln()
}

/// `Gap(k) = mean_b log W_k(ref_b) − log W_k(data)` with `B` uniform
/// references drawn in the data's bounding box. Picks the smallest `k` with
/// `Gap(k) ≥ Gap(k+1) − s_{k+1}`, where `s_k = sd_k · √(1 + 1/B)`; `k_max`
/// when no `k` qualifies.
pub fn gap_statistic(points: &EmbeddingTable, k_max: usize, b: usize, seed: u64) -> Result<GapStatistic, ClusterError> {
    if b == 0 {
        return Err(ClusterError::InvalidParameter("B must be >= 1"));
    }
    if k_max == 0 {
        return Err(ClusterError::KTooSmall { k: 0, min: 1 });
    }
    let (n, d) = (points.rows(), points.dim());
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for row in points.iter_rows() {
        for j in 0..d {
            lo[j] = lo[j].min(row[j]);
            hi[j] = hi[j].max(row[j]);
        }
    }
    let references: Vec<EmbeddingTable> = (0..b)
        .map(|r| {
            let mut rng = rng::stream(seed, (1 << 40) + r as u64);
            let rows: Vec<Vec<f64>> =
                (0..n).map(|_| (0..d).map(|j| lo[j] + (hi[j] - lo[j]) * rng.random::<f64>()).collect()).collect();
            EmbeddingTable::from_rows(&rows)
        })
        .collect();

    let mut gap = Vec::with_capacity(k_max);
    let mut s = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let data = log_w(fit(points, k, seed)?.inertia);
        let refs =
            references.iter().map(|r| fit(r, k, seed).map(|m| log_w(m.inertia))).collect::<Result<Vec<_>, _>>()?;
        let mean = refs.iter().sum::<f64>() / b as f64;
        let sd = (refs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / b as f64).sqrt();
        gap.push(mean - data);
        s.push(sd * (1.0 + 1.0 / b as f64).sqrt());
    }
    let k = (1..k_max).find(|&k| gap[k - 1] >= gap[k] - s[k]).unwrap_or(k_max);
    Ok(GapStatistic { k, gap, s })
}

/// The three selectors run on the same points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorSummary {
    pub silhouette: usize,
    pub elbow: usize,
    pub gap: usize,
}

pub fn compare_selectors(
    points: &EmbeddingTable,
    k_max: usize,
    gap_b: usize,
    seed: u64,
) -> Result<SelectorSummary, ClusterError> {
    Ok(SelectorSummary {
        silhouette: select_k_silhouette(points, k_max, seed)?.0,
        elbow: select_k_elbow(points, k_max, seed)?,
        gap: gap_statistic(points, k_max, gap_b, seed)?.k,
    })
}
