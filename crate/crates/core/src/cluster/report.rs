//! Silhouette matrix: embedding models as rows, clustering methods as columns.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{agglomerative, kmeans, ClusterError, Linkage};
use crate::embedding::EmbeddingTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringReport {
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

impl ClusteringReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model");
        for c in &self.columns {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for (name, cells) in &self.rows {
            out.push_str(name);
            for v in cells {
                let _ = write!(out, ",{v:.4}");
            }
            out.push('\n');
        }
        out
    }
}

/// Mean silhouette of k-means and agglomerative clusterings of each
/// embedding, at a fixed `k`.
pub fn clustering_report(
    embeddings: &[(String, EmbeddingTable)],
    k: usize,
    linkage: Linkage,
    seed: u64,
) -> Result<ClusteringReport, ClusterError> {
    if k < 2 {
        return Err(ClusterError::KTooSmall { k, min: 2 });
    }
    let rows = embeddings
        .iter()
        .map(|(name, table)| {
            let km = kmeans(table, k, seed, 300)?.silhouette.expect("k >= 2");
            let ag = agglomerative(table, k, linkage)?.silhouette.expect("k >= 2");
            Ok((name.clone(), vec![km, ag]))
        })
        .collect::<Result<_, ClusterError>>()?;
    Ok(ClusteringReport { columns: vec!["K-means".into(), "Agglomerative clustering".into()], rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let r = ClusteringReport {
            columns: vec!["K-means".into(), "Agglomerative clustering".into()],
            rows: vec![("DeepWalk".into(), vec![0.68, 0.53]), ("node2vec".into(), vec![0.63, 0.64])],
        };
        assert_eq!(
            r.to_csv(),
            "model,K-means,Agglomerative clustering\nDeepWalk,0.6800,0.5300\nnode2vec,0.6300,0.6400\n"
        );
    }

    #[test]
    fn same_partition_same_cells() {
        let t = EmbeddingTable::from_rows(&[vec![0.0], vec![1.0], vec![20.0], vec![21.0]]);
        let r = clustering_report(&[("a".into(), t.clone()), ("b".into(), t)], 2, Linkage::Average, 0).unwrap();
        assert_eq!(r.rows[0].1[0], r.rows[0].1[1]);
        assert_eq!(r.rows[0].1, r.rows[1].1);
        assert_eq!(r.to_csv().lines().count(), 3);
    }
}
