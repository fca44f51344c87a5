use serde::{Deserialize, Serialize};

use crate::class::SoundClass;
use crate::error::{Error, Result};
use crate::features::{FeatureTable, FeatureVector};

/// Fully labeled rows of equal dimensionality.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledDataset {
    pub names: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
    pub labels: Vec<SoundClass>,
}

impl LabeledDataset {
    pub fn new(names: Vec<String>, vectors: Vec<Vec<f64>>, labels: Vec<SoundClass>) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: vectors.len(), got: labels.len() });
        }
        let dim = vectors.first().map_or(names.len(), Vec::len);
        if !names.is_empty() && names.len() != dim {
            return Err(Error::DimensionMismatch { expected: names.len(), got: dim });
        }
        if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
        }
        Ok(Self { names, vectors, labels })
    }

    pub fn from_feature_vectors(names: Vec<String>, vectors: &[FeatureVector]) -> Result<Self> {
        let labels = vectors
            .iter()
            .map(|v| v.label.ok_or_else(|| Error::InsufficientData("unlabeled feature vector".into())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, vectors.iter().map(FeatureVector::to_vec).collect(), labels)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(self.names.len(), Vec::len)
    }

    /// Per-class row counts in `SoundClass::ALL` order.
    pub fn class_counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for l in &self.labels {
            counts[l.index()] += 1;
        }
        counts
    }

    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            names: self.names.clone(),
            vectors: rows.iter().map(|&i| self.vectors[i].clone()).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn select_columns(&self, columns: &[usize]) -> Self {
        Self {
            names: columns.iter().filter_map(|&c| self.names.get(c).cloned()).collect(),
            vectors: self.vectors.iter().map(|v| columns.iter().map(|&c| v[c]).collect()).collect(),
            labels: self.labels.clone(),
        }
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.vectors.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("training features"));
        }
        Ok(())
    }
}

impl TryFrom<FeatureTable> for LabeledDataset {
    type Error = Error;

    fn try_from(table: FeatureTable) -> Result<Self> {
        let labels = table
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| l.ok_or_else(|| Error::InsufficientData(format!("row {} has no label", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(table.names, table.rows, labels)
    }
}

/// Per-dimension z-score statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Population statistics; constant columns get unit scale.
    pub fn fit(vectors: &[Vec<f64>]) -> Self {
        let dim = vectors.first().map_or(0, Vec::len);
        let n = vectors.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for v in vectors {
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for v in vectors {
            for ((s, x), m) in var.iter_mut().zip(v).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        let std = var.into_iter().map(|s| (s / n).sqrt()).map(|s| if s > 0.0 { s } else { 1.0 }).collect();
        Self { mean, std }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.mean).zip(&self.std).map(|((x, m), s)| (x - m) / s).collect()
    }

    pub fn apply_all(&self, vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        vs.iter().map(|v| self.apply(v)).collect()
    }
}
