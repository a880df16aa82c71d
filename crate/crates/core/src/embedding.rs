//! Dense per-entity (or per-relation) vectors and their JSON file format.

use std::fmt::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("invalid embedding file: {0}")]
    Format(String),
    #[error("vector for `{name}` has length {found}, expected {dim}")]
    DimMismatch { name: String, dim: usize, found: usize },
    #[error("no vector for `{0}`")]
    Missing(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Row-major table of `rows × dim` reals.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        EmbeddingTable { dim, data: vec![0.0; rows * dim] }
    }

    /// Each component drawn uniformly from `[-bound, bound]`.
    pub fn uniform<R: Rng>(rows: usize, dim: usize, bound: f64, rng: &mut R) -> Self {
        let data = (0..rows * dim).map(|_| rng.random_range(-bound..=bound)).collect();
        EmbeddingTable { dim, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == dim), "ragged rows");
        EmbeddingTable { dim, data: rows.concat() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn set_row(&mut self, i: usize, v: &[f64]) {
        self.row_mut(i).copy_from_slice(v);
    }

    pub fn push_row(&mut self, v: &[f64]) {
        assert_eq!(v.len(), self.dim);
        self.data.extend_from_slice(v);
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter_rows().map(<[f64]>::to_vec).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Scale row `i` to unit L2 norm (rows of norm 0 are left alone).
    pub fn normalize_row(&mut self, i: usize) {
        let row = self.row_mut(i);
        let norm = l2_norm(row);
        if norm > 0.0 {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }

    pub fn normalize_rows(&mut self) {
        for i in 0..self.rows() {
            self.normalize_row(i);
        }
    }

    /// Project rows onto their first `components` principal axes.
    pub fn principal_components(&self, components: usize) -> Vec<Vec<f64>> {
        let (n, d) = (self.rows(), self.dim);
        if n == 0 {
            return Vec::new();
        }
        let mut centered = DMatrix::from_row_slice(n, d, &self.data);
        for j in 0..d {
            let mean = centered.column(j).mean();
            centered.column_mut(j).add_scalar_mut(-mean);
        }
        let cov = centered.transpose() * &centered / (n.max(2) - 1) as f64;
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let take = components.min(d);
        (0..n)
            .map(|i| {
                order[..take]
                    .iter()
                    .map(|&c| {
                        let axis = eig.eigenvectors.column(c);
                        // fix the sign so the largest-magnitude loading is positive
                        let sign =
                            axis.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m }).signum();
                        centered.row(i).iter().zip(axis.iter()).map(|(x, a)| x * a * sign).sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// `name,pc1,pc2,pc3` CSV of the first three principal components.
    pub fn pca_csv(&self, names: &[String]) -> String {
        let proj = self.principal_components(3);
        let mut out = String::from("entity,pc1,pc2,pc3\n");
        for (name, p) in names.iter().zip(proj) {
            let _ = write!(out, "{name}");
            for k in 0..3 {
                let _ = write!(out, ",{}", p.get(k).copied().unwrap_or(0.0));
            }
            out.push('\n');
        }
        out
    }

    /// `{"<name>": [..], ...}` in row order.
    pub fn to_json_map(&self, names: &[String]) -> Map<String, Value> {
        assert_eq!(names.len(), self.rows(), "names must align with rows");
        names.iter().zip(self.iter_rows()).map(|(n, row)| (n.clone(), Value::from(row.to_vec()))).collect()
    }

    /// Build a table aligned to `names` from a JSON name → vector map.
    pub fn from_json_map(map: &Map<String, Value>, names: &[String], dim: usize) -> Result<Self, EmbeddingError> {
        let mut table = EmbeddingTable::zeros(names.len(), dim);
        for (i, name) in names.iter().enumerate() {
            let v = map.get(name).ok_or_else(|| EmbeddingError::Missing(name.clone()))?;
            let v = parse_vector(name, v, dim)?;
            table.set_row(i, &v);
        }
        Ok(table)
    }
}

fn parse_vector(name: &str, v: &Value, dim: usize) -> Result<Vec<f64>, EmbeddingError> {
    let arr = v.as_array().ok_or_else(|| EmbeddingError::Format(format!("`{name}` is not an array")))?;
    if arr.len() != dim {
        return Err(EmbeddingError::DimMismatch { name: name.to_owned(), dim, found: arr.len() });
    }
    arr.iter()
        .map(|x| x.as_f64().ok_or_else(|| EmbeddingError::Format(format!("`{name}` has a non-numeric component"))))
        .collect()
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let denom = l2_norm(a) * l2_norm(b);
    if denom == 0.0 {
        0.0
    } else {
        dot(a, b) / denom
    }
}

/// Entity embedding file: `{"dim": d, "entities": {"<name>": [f, ...]}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingFile {
    pub dim: usize,
    pub entities: Map<String, Value>,
}

impl EmbeddingFile {
    pub fn new(table: &EmbeddingTable, names: &[String]) -> Self {
        EmbeddingFile { dim: table.dim(), entities: table.to_json_map(names) }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("embedding file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, EmbeddingError> {
        let file: EmbeddingFile = serde_json::from_str(text)?;
        for (name, v) in &file.entities {
            parse_vector(name, v, file.dim)?;
        }
        Ok(file)
    }

    /// Entity names in file order.
    pub fn names(&self) -> Vec<String> {
        self.entities.keys().cloned().collect()
    }

    /// Table aligned to `names` (usually a graph's entity vocabulary).
    pub fn table_for(&self, names: &[String]) -> Result<EmbeddingTable, EmbeddingError> {
        EmbeddingTable::from_json_map(&self.entities, names, self.dim)
    }

    /// Table in file order.
    pub fn table(&self) -> EmbeddingTable {
        self.table_for(&self.names()).expect("validated on load")
    }
}
