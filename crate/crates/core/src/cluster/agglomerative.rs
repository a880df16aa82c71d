use serde::{Deserialize, Serialize};

use super::{sq_dist, ClusterError, ClusterModel};
use crate::embedding::EmbeddingTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    #[default]
    Average,
}

/// Bottom-up merging under Euclidean distance until `k` clusters remain.
///
/// Cluster distances are maintained with the Lance-Williams update. The
/// closest pair merges; ties go to the lexicographically smallest `(i, j)`
/// and the merged cluster keeps id `i`.
pub fn agglomerative(points: &EmbeddingTable, k: usize, linkage: Linkage) -> Result<ClusterModel, ClusterError> {
    let n = points.rows();
    if k == 0 {
        return Err(ClusterError::KTooSmall { k, min: 1 });
    }
    if k > n {
        return Err(ClusterError::KTooLarge { k, n });
    }
    let mut dist: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| sq_dist(points.row(i), points.row(j)).sqrt()).collect()).collect();
    (0..n).for_each(|i| dist[i][i] = 0.0);
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut owner: Vec<usize> = (0..n).collect();
    for _ in 0..n - k {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in (0..n).filter(|&i| active[i]) {
            for j in (i + 1..n).filter(|&j| active[j]) {
                if best.is_none_or(|(_, _, d)| dist[i][j] < d) {
                    best = Some((i, j, dist[i][j]));
                }
            }
        }
        let (i, j, _) = best.expect("more than k clusters remain");
        for m in (0..n).filter(|&m| active[m] && m != i && m != j) {
            let (dim, djm) = (dist[i][m], dist[j][m]);
            let d = match linkage {
                Linkage::Single => dim.min(djm),
                Linkage::Complete => dim.max(djm),
                Linkage::Average => (size[i] as f64 * dim + size[j] as f64 * djm) / (size[i] + size[j]) as f64,
            };
            dist[i][m] = d;
            dist[m][i] = d;
        }
        size[i] += size[j];
        active[j] = false;
        owner.iter_mut().filter(|o| **o == j).for_each(|o| *o = i);
    }
    ClusterModel::from_assignments(points, owner)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> EmbeddingTable {
        EmbeddingTable::from_rows(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>())
    }

    #[test]
    fn collinear_gaps_any_linkage() {
        let p = line(&[0.0, 1.0, 10.0, 11.0]);
        for l in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            let m = agglomerative(&p, 2, l).unwrap();
            assert_eq!(m.assignments, vec![0, 0, 1, 1], "{l:?}");
            assert_eq!(m.centroids, vec![vec![0.5], vec![10.5]]);
        }
    }

    #[test]
    fn extremes() {
        let p = line(&[3.0, 1.0, 2.0]);
        assert_eq!(agglomerative(&p, 3, Linkage::Single).unwrap().assignments, vec![0, 1, 2]);
        let one = agglomerative(&p, 1, Linkage::Complete).unwrap();
        assert_eq!((one.k, one.assignments.clone(), one.silhouette), (1, vec![0, 0, 0], None));
        assert_eq!(agglomerative(&p, 4, Linkage::Single), Err(ClusterError::KTooLarge { k: 4, n: 3 }));
    }

    #[test]
    fn tie_breaks_to_first_pair() {
        // 0-1 and 1-2 both at distance 1: (0,1) merges first
        let p = line(&[0.0, 1.0, 2.0]);
        assert_eq!(agglomerative(&p, 2, Linkage::Single).unwrap().assignments, vec![0, 0, 1]);
    }

    #[test]
    fn single_and_complete_differ_on_a_chain() {
        // single linkage cuts the widest gap; complete linkage caps diameters
        let p = line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.5]);
        assert_eq!(agglomerative(&p, 2, Linkage::Single).unwrap().assignments, vec![0, 0, 0, 0, 0, 1]);
        assert_eq!(agglomerative(&p, 2, Linkage::Complete).unwrap().assignments, vec![0, 0, 0, 0, 1, 1]);
    }
}
