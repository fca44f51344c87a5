//! Stratified k-fold cross-validation and the classifier × feature-set grid.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use super::metrics::{ConfusionMatrix, Metrics};
use super::model::{train, ModelKind, ModelSpec};
use crate::class::SoundClass;
use crate::error::{Error, Result};
use crate::features::FeatureSet;

pub const DEFAULT_FOLDS: usize = 6;

/// Derives an independent stream seed from `(seed, stream)`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // SplitMix64 finalizer.
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold index of every row: each class is shuffled separately and dealt
/// round-robin, so every fold gets `floor` or `ceil` of its share.
pub fn stratified_folds(labels: &[SoundClass], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    for class in SoundClass::ALL {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        rows.shuffle(&mut rng);
        for (pos, row) in rows.into_iter().enumerate() {
            assignment[row] = pos % folds;
        }
    }
    assignment
}

pub fn evaluate_cv(data: &LabeledDataset, spec: &ModelSpec, folds: usize, seed: u64) -> Result<Metrics> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {folds}")));
    }
    for class in SoundClass::ALL {
        let n = data.class_counts()[class.index()];
        if n > 0 && n < folds {
            return Err(Error::InsufficientData(format!("class {class} has {n} rows, fewer than {folds} folds")));
        }
    }
    let assignment = stratified_folds(&data.labels, folds, seed);
    let confusions = (0..folds)
        .into_par_iter()
        .map(|fold| {
            let (test, train_rows): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| assignment[i] == fold);
            let fold_spec = spec.with_seed(derive_seed(seed, fold as u64));
            let model = train(&data.subset(&train_rows), &fold_spec)?;
            let mut cm = ConfusionMatrix::default();
            for &i in &test {
                cm.record(data.labels[i], model.predict(&data.vectors[i])?);
            }
            Ok(cm)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = ConfusionMatrix::default();
    for cm in &confusions {
        total.merge(cm);
    }
    Ok(total.metrics())
}

/// Overall accuracy (percent) for each classifier × feature set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonGrid {
    pub cells: Vec<(ModelKind, FeatureSet, f64)>,
}

impl ComparisonGrid {
    pub fn accuracy(&self, kind: ModelKind, set: FeatureSet) -> Option<f64> {
        self.cells.iter().find(|c| c.0 == kind && c.1 == set).map(|c| c.2)
    }
}

impl fmt::Display for ComparisonGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<8}", "model")?;
        for set in FeatureSet::ALL {
            write!(f, "{:>10}", set.as_str())?;
        }
        writeln!(f)?;
        for kind in ModelKind::ALL {
            write!(f, "{:<8}", kind.as_str())?;
            for set in FeatureSet::ALL {
                match self.accuracy(kind, set) {
                    Some(a) => write!(f, "{a:>10.2}")?,
                    None => write!(f, "{:>10}", "-")?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Runs `evaluate_cv` for every classifier on every feature subset.
pub fn compare_feature_sets(data: &LabeledDataset, base: &ModelSpec, folds: usize, seed: u64) -> Result<ComparisonGrid> {
    let mut cells = Vec::with_capacity(12);
    for kind in ModelKind::ALL {
        for set in FeatureSet::ALL {
            let spec = ModelSpec { kind, feature_set: set, ..*base };
            let metrics = evaluate_cv(data, &spec, folds, seed)?;
            cells.push((kind, set, metrics.overall_accuracy));
        }
    }
    Ok(ComparisonGrid { cells })
}
