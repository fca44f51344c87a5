//! Gaussian naive Bayes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use crate::class::SoundClass;
use crate::error::{Error, Result};

pub const VARIANCE_FLOOR: f64 = 1e-9;
/// Log-posteriors closer than this are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassGaussian {
    pub class: SoundClass,
    pub log_prior: f64,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbModel {
    pub classes: Vec<ClassGaussian>,
}

pub fn train_gnb(data: &LabeledDataset) -> Result<GnbModel> {
    if data.is_empty() {
        return Err(Error::InsufficientData("naive Bayes needs training data".into()));
    }
    data.check_finite()?;
    let dim = data.dim();
    let total = data.len() as f64;
    let mut classes = Vec::new();
    for class in SoundClass::ALL {
        let rows: Vec<&Vec<f64>> = data.vectors.iter().zip(&data.labels).filter(|(_, &l)| l == class).map(|(v, _)| v).collect();
        match rows.len() {
            0 => continue,
            1 => return Err(Error::InsufficientData(format!("class {class} has a single sample; variance undefined"))),
            _ => {}
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in &rows {
            for (m, x) in mean.iter_mut().zip(r.iter()) {
                *m += x / n;
            }
        }
        let mut var = vec![0.0; dim];
        for r in &rows {
            for ((s, x), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
                *s += (x - m) * (x - m) / (n - 1.0);
            }
        }
        var.iter_mut().for_each(|v| *v = v.max(VARIANCE_FLOOR));
        classes.push(ClassGaussian { class, log_prior: (n / total).ln(), mean, var });
    }
    Ok(GnbModel { classes })
}

impl GnbModel {
    pub fn log_posteriors(&self, vector: &[f64]) -> Vec<(SoundClass, f64)> {
        self.classes
            .iter()
            .map(|c| {
                let ll: f64 = vector
                    .iter()
                    .zip(&c.mean)
                    .zip(&c.var)
                    .map(|((x, m), v)| -0.5 * (2.0 * PI * v).ln() - (x - m) * (x - m) / (2.0 * v))
                    .sum();
                (c.class, c.log_prior + ll)
            })
            .collect()
    }

    pub fn predict(&self, vector: &[f64]) -> SoundClass {
        let lp = self.log_posteriors(vector);
        let best = lp.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        lp.into_iter()
            .filter(|p| p.1 >= best - TIE_TOLERANCE || p.1.is_nan())
            .map(|p| p.0)
            .max_by_key(|c| c.danger())
            .unwrap_or(SoundClass::NV)
    }
}
