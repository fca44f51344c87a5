//! Principal component analysis by eigendecomposition of the sample covariance.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Orthonormal rows, sorted by decreasing explained variance. All
    /// components are kept; only the first `retained` are used for projection.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub retained: usize,
}

pub const DEFAULT_RETAINED_VARIANCE: f64 = 0.95;

pub fn pca_fit(vectors: &[Vec<f64>], retained_variance: f64) -> Result<PcaModel> {
    if vectors.len() < 2 {
        return Err(Error::InsufficientData(format!("PCA needs at least 2 samples, got {}", vectors.len())));
    }
    if !(retained_variance > 0.0 && retained_variance <= 1.0) {
        return Err(Error::InvalidConfig(format!("retained variance {retained_variance} outside (0, 1]")));
    }
    let dim = vectors[0].len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
    }
    let n = vectors.len() as f64;
    let mut mean = vec![0.0; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x / n;
        }
    }

    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    for v in vectors {
        for i in 0..dim {
            let di = v[i] - mean[i];
            for j in i..dim {
                cov[(i, j)] += di * (v[j] - mean[j]);
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            let c = cov[(i, j)] / (n - 1.0);
            cov[(i, j)] = c;
            cov[(j, i)] = c;
        }
    }

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut components = Vec::with_capacity(dim);
    let mut explained_variance = Vec::with_capacity(dim);
    for &k in &order {
        let mut row: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        // Deterministic sign: the largest-magnitude entry is positive.
        let pivot = row.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(row);
        explained_variance.push(eig.eigenvalues[k].max(0.0));
    }

    let total: f64 = explained_variance.iter().sum();
    let retained = if total <= 0.0 {
        1
    } else {
        let mut cumulative = 0.0;
        let mut k = dim;
        for (i, v) in explained_variance.iter().enumerate() {
            cumulative += v;
            // Small slack so that 1.0 is reachable despite rounding.
            if cumulative >= retained_variance * total * (1.0 - 1e-12) {
                k = i + 1;
                break;
            }
        }
        k
    };

    Ok(PcaModel { mean, components, explained_variance, retained })
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Share of total variance per component.
    pub fn explained_ratio(&self) -> Vec<f64> {
        let total: f64 = self.explained_variance.iter().sum();
        self.explained_variance.iter().map(|v| v / total).collect()
    }

    pub fn transform(&self, vector: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(vector)?;
        let centered: Vec<f64> = vector.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        self.project(&centered)
    }

    /// Projection without mean subtraction (the linear part of `transform`).
    pub fn project(&self, vector: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(vector)?;
        Ok(self.components[..self.retained].iter().map(|c| c.iter().zip(vector).map(|(a, b)| a * b).sum()).collect())
    }

    pub fn inverse_transform(&self, reduced: &[f64]) -> Result<Vec<f64>> {
        if reduced.len() != self.retained {
            return Err(Error::DimensionMismatch { expected: self.retained, got: reduced.len() });
        }
        let mut out = self.mean.clone();
        for (c, &w) in self.components.iter().zip(reduced) {
            for (o, x) in out.iter_mut().zip(c) {
                *o += w * x;
            }
        }
        Ok(out)
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(())
    }
}
