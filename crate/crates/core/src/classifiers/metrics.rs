//! Confusion counts and per-class one-vs-rest metrics, reported in percent.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::class::SoundClass;

/// Harmonic mean of precision and recall; zero when both are zero.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// `counts[truth][predicted]` in `SoundClass::ALL` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 4]; 4],
}

impl ConfusionMatrix {
    pub fn record(&mut self, truth: SoundClass, predicted: SoundClass) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, o) in self.counts.iter_mut().zip(&other.counts) {
            for (c, x) in row.iter_mut().zip(o) {
                *c += x;
            }
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..4).map(|i| self.counts[i][i]).sum()
    }

    /// `(tp, fp, fn, tn)` for `class` against the rest.
    pub fn one_vs_rest(&self, class: SoundClass) -> (usize, usize, usize, usize) {
        let c = class.index();
        let tp = self.counts[c][c];
        let fp = (0..4).filter(|&t| t != c).map(|t| self.counts[t][c]).sum();
        let fn_ = (0..4).filter(|&p| p != c).map(|p| self.counts[c][p]).sum();
        let tn = self.total() - tp - fp - fn_;
        (tp, fp, fn_, tn)
    }

    pub fn metrics(&self) -> Metrics {
        let per_class = SoundClass::ALL.map(|class| {
            let (tp, fp, fn_, tn) = self.one_vs_rest(class);
            ClassMetrics::from_counts(tp, fp, fn_, tn)
        });
        let total = self.total();
        let overall_accuracy = if total == 0 { 0.0 } else { 100.0 * self.correct() as f64 / total as f64 };
        Metrics { per_class, overall_accuracy, confusion: *self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    /// One-vs-rest accuracy.
    pub accuracy: f64,
    pub f_measure: f64,
}

impl ClassMetrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let pct = |num: usize, den: usize| if den == 0 { 0.0 } else { 100.0 * num as f64 / den as f64 };
        let precision = pct(tp, tp + fp);
        let recall = pct(tp, tp + fn_);
        Self { precision, recall, accuracy: pct(tp + tn, tp + fp + fn_ + tn), f_measure: f_measure(precision, recall) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub per_class: [ClassMetrics; 4],
    pub overall_accuracy: f64,
    pub confusion: ConfusionMatrix,
}

impl Metrics {
    pub fn class(&self, class: SoundClass) -> &ClassMetrics {
        &self.per_class[class.index()]
    }
}

/// Per-class table: one column per class, rows Precision / Recall / Accuracy / f-measure.
impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<10}", "")?;
        for c in SoundClass::ALL {
            write!(f, "{:>10}", format!("{c} class"))?;
        }
        writeln!(f)?;
        type Row = (&'static str, fn(&ClassMetrics) -> f64);
        let rows: [Row; 4] =
            [("Precision", |m| m.precision), ("Recall", |m| m.recall), ("Accuracy", |m| m.accuracy), ("f-measure", |m| m.f_measure)];
        for (name, get) in rows {
            write!(f, "{name:<10}")?;
            for m in &self.per_class {
                write!(f, "{:>10.2}", get(m))?;
            }
            writeln!(f)?;
        }
        writeln!(f, "Overall accuracy: {:.2}% ({} / {})", self.overall_accuracy, self.confusion.correct(), self.confusion.total())
    }
}
