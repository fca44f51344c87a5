use serde::{Deserialize, Serialize};

use super::dataset::{LabeledDataset, Standardizer};
use crate::class::{break_ties, SoundClass};
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub scaler: Standardizer,
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<SoundClass>,
}

pub fn train_knn(data: &LabeledDataset, k: usize) -> Result<KnnModel> {
    if data.is_empty() {
        return Err(Error::InsufficientData("KNN needs a non-empty training set".into()));
    }
    if k == 0 || k > data.len() {
        return Err(Error::InvalidConfig(format!("k = {k} outside 1..={}", data.len())));
    }
    data.check_finite()?;
    let scaler = Standardizer::fit(&data.vectors);
    Ok(KnnModel { k, points: scaler.apply_all(&data.vectors), scaler, labels: data.labels.clone() })
}

impl KnnModel {
    /// The `k` nearest training rows as `(row, distance)`, nearest first;
    /// equal distances keep training order.
    pub fn neighbors(&self, vector: &[f64]) -> Vec<(usize, f64)> {
        let q = self.scaler.apply(vector);
        let mut dists: Vec<(usize, f64)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()))
            .collect();
        let by_distance = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
        if self.k < dists.len() {
            dists.select_nth_unstable_by(self.k - 1, by_distance);
            dists.truncate(self.k);
        }
        dists.sort_by(by_distance);
        dists
    }

    /// Majority label among the neighbors; ties go to the smaller mean
    /// distance, then to the more dangerous class.
    pub fn predict(&self, vector: &[f64]) -> SoundClass {
        let mut count = [0usize; 4];
        let mut dist = [0.0f64; 4];
        for (i, d) in self.neighbors(vector) {
            let c = self.labels[i].index();
            count[c] += 1;
            dist[c] += d;
        }
        break_ties(SoundClass::ALL.into_iter().map(|c| (c, count[c.index()], dist[c.index()] / count[c.index()].max(1) as f64)))
            .expect("k >= 1")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use SoundClass::*;

    fn data() -> LabeledDataset {
        LabeledDataset::new(
            vec![],
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![5.0, 5.0], vec![5.0, 6.0], vec![5.5, 5.5]],
            vec![H, H, NV, NV, NV],
        )
        .unwrap()
    }

    #[test]
    fn k1_returns_exact_match() {
        let m = train_knn(&data(), 1).unwrap();
        for (v, l) in data().vectors.iter().zip(&data().labels) {
            assert_eq!(m.predict(v), *l);
        }
    }

    #[test]
    fn k_equal_to_size_is_global_majority() {
        let m = train_knn(&data(), 5).unwrap();
        assert_eq!(m.predict(&[0.0, 0.0]), NV);
    }

    #[test]
    fn bad_k_rejected() {
        assert!(train_knn(&data(), 0).is_err());
        assert!(train_knn(&data(), 6).is_err());
        assert!(train_knn(&LabeledDataset::default(), 1).is_err());
    }

    #[test]
    fn equal_votes_go_to_closer_class() {
        let d = LabeledDataset::new(vec![], vec![vec![0.0], vec![3.0], vec![10.0]], vec![LL, LH, H]).unwrap();
        let m = train_knn(&d, 2).unwrap();
        // Query 1.0: neighbors LL (1.0) and LH (2.0), one vote each.
        assert_eq!(m.predict(&[1.0]), LL);
        // Query 1.5: equidistant, danger ordering decides.
        assert_eq!(m.predict(&[1.5]), LH);
    }
}
